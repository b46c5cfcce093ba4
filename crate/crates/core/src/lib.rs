//! Spectral laboratory for the periodic alpha-FPU lattice and its KdV
//! continuum limit.
//!
//! The crate implements discrete Fourier analysis on the `2N`-point lattice
//! torus, the piecewise-linear interpolation operator onto the continuum
//! torus, integrating-factor solvers for the coupled and decoupled two-wave
//! reformulations of the FPU system and for the counter-propagating KdV
//! system, the normal-form (regularization) machinery with its resonance
//! calculus, and an experiment harness that measures convergence rates of
//! the lattice dynamics towards KdV as the mesh `h = pi/N` shrinks.
//!
//! Every major capability has a runnable example under `examples/`; the
//! `fpu-kdv` binary exposes the same entry points as subcommands.

pub mod error;
pub mod fpu;
pub mod grid;
pub mod harness;
pub mod identities;
pub mod interp;
pub mod kdv;
pub mod normal_form;
pub(crate) mod ode;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::LatticeGrid;
pub use spectral::{Field, ProductMode, Spectrum, Symbol};

/// Branch selector for the two counter-propagating wave families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `+1.0` or `-1.0`, the sign carried by the propagator phase.
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// `1 / sqrt(2*pi)`, the constant carried by products of Fourier series.
pub(crate) const INV_SQRT_2PI: f64 = 0.3989422804014327;
