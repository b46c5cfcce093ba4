//! Time evolution of the lattice FPU system in three equivalent forms:
//! direct second-order wave integration, and integrating-factor spectral
//! solvers for the coupled and decoupled two-wave profile systems, plus the
//! Hamiltonian and conservation diagnostics.

use crate::error::{Error, Result};
use crate::grid::LatticeGrid;
use crate::ode::{check_finite, rk4_step, step_count};
use crate::spectral::{
    apply_symbol, forward_dft, gradient_symbol, inverse_dft, spectral_product, Field, ProductMode,
    Spectrum, Symbol,
};
use crate::Sign;
use num_complex::Complex64;

/// Dispersion phase of the free lattice flow relative to pure transport:
/// `s_h(k) = (k - (2/h) sin(hk/2)) / h^2`, the lattice analogue of `k^3/24`.
pub fn dispersion(h: f64, k: i64) -> f64 {
    (k as f64 - gradient_symbol(h, k)) / (h * h)
}

/// Third-order Airy phase `k^3/24`, the `h -> 0` limit of [`dispersion`].
pub fn airy_dispersion(k: i64) -> f64 {
    let kf = k as f64;
    kf * kf * kf / 24.0
}

/// Relative displacement and velocity of the rescaled lattice wave field.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub r: Field,
    pub r_t: Field,
}

/// Which two-wave system a profile pair evolves under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Exact reformulation: each wave also sees the counter-propagating one.
    Coupled,
    /// Left/right movers evolve independently.
    Decoupled,
}

/// Counter-propagating profiles with the free flow factored out,
/// `U^{+-}(t) = S_h^{+-}(-t) u_h^{+-}(t)`, both mean-zero with zero Nyquist.
#[derive(Debug, Clone)]
pub struct ProfilePair {
    pub plus: Spectrum,
    pub minus: Spectrum,
    pub t: f64,
    pub kind: SystemKind,
}

impl ProfilePair {
    pub fn grid(&self) -> LatticeGrid {
        self.plus.grid()
    }

    pub fn spectrum(&self, sign: Sign) -> &Spectrum {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// Physical-side spectrum `u^{+-}(t) = S_h^{+-}(t) U^{+-}(t)`.
    pub fn physical(&self, sign: Sign) -> Spectrum {
        apply_propagator(self.spectrum(sign), self.t, sign)
    }

    /// `l^2` distance between the same-sign profiles of two pairs (equals
    /// the physical `L^2` distance by propagator isometry).
    pub fn l2_distance(&self, other: &ProfilePair, sign: Sign) -> f64 {
        self.spectrum(sign)
            .coeffs()
            .iter()
            .zip(other.spectrum(sign).coeffs())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Solver switches; the defaults run the full dynamics.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Evolve the quadratic term (off = free flow, profiles stay constant).
    pub nonlinearity: bool,
    /// Coupled system only: drop the mixed and opposite-wave terms,
    /// making the coupled equations identical to the decoupled ones.
    pub zero_cross_terms: bool,
    /// Run the continuum generator on the lattice window: the Airy phase
    /// `k^3/24` in place of `s_h(k)` and the exact derivative `ik` in place
    /// of the lattice gradient (the infinite-N limit of both symbols).
    pub airy_phase: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            nonlinearity: true,
            zero_cross_terms: false,
            airy_phase: false,
        }
    }
}

/// Uniformly sampled states of a solve, `states[i]` at time `i * dt`.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub dt: f64,
    pub states: Vec<S>,
    pub options: SolveOptions,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time_at(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.time_at(self.states.len().saturating_sub(1))
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory holds at least t = 0")
    }

    /// Indices of `count` samples spread uniformly over the stored range.
    pub fn sample_indices(&self, count: usize) -> Vec<usize> {
        let last = self.states.len() - 1;
        if count <= 1 || last == 0 {
            return vec![last];
        }
        (0..count)
            .map(|j| (j as f64 / (count - 1) as f64 * last as f64).round() as usize)
            .collect()
    }
}

/// Split wave initial data into the two-wave form
/// `u_0^{+-} = (F r_0 -+ h^2 grad^{-1} F r_1) / 2`; both inputs mean-zero.
pub fn split_initial(w: &WaveState, kind: SystemKind) -> Result<ProfilePair> {
    let r0 = forward_dft(&w.r);
    let r1 = forward_dft(&w.r_t);
    for s in [&r0, &r1] {
        let mean = s.mean_coefficient().norm();
        if mean > 1e-10 * s.linf().max(1.0) {
            return Err(Error::NonzeroMean(mean));
        }
    }
    let h = w.r.grid().h();
    let mut shift = apply_symbol(&r1, Symbol::GradientInverse)?;
    for c in shift.coeffs_mut() {
        *c *= h * h;
    }
    let mut plus = r0.clone();
    let mut minus = r0;
    for i in 0..plus.coeffs().len() {
        let s = shift.coeffs()[i];
        plus.coeffs_mut()[i] = 0.5 * (plus.coeffs()[i] - s);
        minus.coeffs_mut()[i] = 0.5 * (minus.coeffs()[i] + s);
    }
    plus.set_coeff(0, Complex64::ZERO);
    minus.set_coeff(0, Complex64::ZERO);
    Ok(ProfilePair {
        plus,
        minus,
        t: 0.0,
        kind,
    })
}

fn phase(h: f64, k: i64, airy: bool) -> f64 {
    if airy {
        airy_dispersion(k)
    } else {
        dispersion(h, k)
    }
}

fn propagate_opt(s: &Spectrum, t: f64, sign: Sign, airy: bool) -> Spectrum {
    let h = s.grid().h();
    let mut out = s.clone();
    for (i, k) in s.grid().modes().enumerate() {
        let theta = sign.value() * t * phase(h, k, airy);
        out.coeffs_mut()[i] *= Complex64::new(0.0, theta).exp();
    }
    out
}

/// Free lattice flow `S_h^{+-}(t)`: multiply `coeff(k)` by `e^{+- i t s_h(k)}`.
pub fn apply_propagator(s: &Spectrum, t: f64, sign: Sign) -> Spectrum {
    propagate_opt(s, t, sign, false)
}

/// Phase translation `e^{+- (2t/h^2) d_h}`: multiply by `e^{+- 2ikt/h^2}`.
pub fn apply_translation(s: &Spectrum, t: f64, sign: Sign) -> Spectrum {
    let h = s.grid().h();
    let mut out = s.clone();
    for (i, k) in s.grid().modes().enumerate() {
        let theta = sign.value() * 2.0 * k as f64 * t / (h * h);
        out.coeffs_mut()[i] *= Complex64::new(0.0, theta).exp();
    }
    out
}

fn rhs_one_sign(p: &ProfilePair, sign: Sign, opts: &SolveOptions) -> Spectrum {
    let grid = p.grid();
    if !opts.nonlinearity {
        return Spectrum::zeros(grid);
    }
    let own = propagate_opt(p.spectrum(sign), p.t, sign, opts.airy_phase);
    let combined = match (p.kind, opts.zero_cross_terms) {
        (SystemKind::Decoupled, _) | (SystemKind::Coupled, true) => own,
        (SystemKind::Coupled, false) => {
            let other_sign = match sign {
                Sign::Plus => Sign::Minus,
                Sign::Minus => Sign::Plus,
            };
            let other = propagate_opt(p.spectrum(other_sign), p.t, other_sign, opts.airy_phase);
            let translated = apply_translation(&other, p.t, sign);
            let mut sum = own;
            for (c, o) in sum.coeffs_mut().iter_mut().zip(translated.coeffs()) {
                *c += o;
            }
            sum
        }
    };
    let sq =
        spectral_product(&combined, &combined, ProductMode::Dealiased).expect("same-grid product");
    let h = grid.h();
    let mut out = sq;
    for (i, k) in grid.modes().enumerate() {
        let deriv = if opts.airy_phase {
            k as f64
        } else {
            gradient_symbol(h, k)
        };
        let grad = Complex64::new(0.0, deriv);
        let undo = Complex64::new(0.0, -sign.value() * p.t * phase(h, k, opts.airy_phase)).exp();
        out.coeffs_mut()[i] *= -0.25 * sign.value() * grad * undo;
    }
    out.set_coeff(0, Complex64::ZERO);
    out.project_nyquist();
    out
}

/// Time derivative of the integrating-factor profiles at the pair's time:
/// `dU^{+-}/dt = -+ 1/4 S_h^{+-}(-t) grad (u^{+-} + cross)^2` with the cross
/// term present only for the coupled system.
pub fn rhs_profile(p: &ProfilePair, opts: &SolveOptions) -> (Spectrum, Spectrum) {
    (
        rhs_one_sign(p, Sign::Plus, opts),
        rhs_one_sign(p, Sign::Minus, opts),
    )
}

/// Default step policy: `min(1e-3, 0.05 / (N * max(1, |u0|_{H^1})))`.
pub fn default_dt(n: usize, h1_norm: f64) -> f64 {
    (1e-3_f64).min(0.05 / (n as f64 * h1_norm.max(1.0)))
}

/// Integrate the profile equations on `[0, T]` with classical RK4; the stiff
/// linear phase is carried exactly by the propagator, so `dt` is set by the
/// nonlinearity alone.
pub fn solve(
    p0: &ProfilePair,
    t_final: f64,
    dt: f64,
    opts: &SolveOptions,
) -> Result<Trajectory<ProfilePair>> {
    let steps = step_count(t_final, dt)?;
    let dt = t_final / steps as f64;
    let grid = p0.grid();
    let limit = 1e6 * (p0.plus.l2() + p0.minus.l2()).max(1.0);
    let mut states = Vec::with_capacity(steps + 1);
    let mut pair = ProfilePair {
        plus: p0.plus.clone(),
        minus: p0.minus.clone(),
        t: 0.0,
        kind: p0.kind,
    };
    states.push(pair.clone());
    for step in 1..=steps {
        let y = vec![pair.plus.coeffs().to_vec(), pair.minus.coeffs().to_vec()];
        let kind = pair.kind;
        let f = |t: f64, v: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            let probe = ProfilePair {
                plus: Spectrum::new(grid, v[0].clone()).expect("grid-sized"),
                minus: Spectrum::new(grid, v[1].clone()).expect("grid-sized"),
                t,
                kind,
            };
            let (dp, dm) = rhs_profile(&probe, opts);
            vec![dp.coeffs().to_vec(), dm.coeffs().to_vec()]
        };
        let next = rk4_step(&y, pair.t, dt, f);
        let t_next = step as f64 * dt;
        check_finite(&next[0], limit, step, t_next)?;
        check_finite(&next[1], limit, step, t_next)?;
        pair = ProfilePair {
            plus: Spectrum::new(grid, next[0].clone())?,
            minus: Spectrum::new(grid, next[1].clone())?,
            t: t_next,
            kind: pair.kind,
        };
        states.push(pair.clone());
    }
    Ok(Trajectory {
        dt,
        states,
        options: *opts,
    })
}

/// Recover the physical wave state from a profile pair: undo the
/// integrating factor and the phase translation, then recombine,
/// `r = e^{-t/h^2 d_h} u^+ + e^{t/h^2 d_h} u^-` and
/// `r_t = -(1/h^2) grad (e^{-t/h^2 d_h} u^+ - e^{t/h^2 d_h} u^-)`.
pub fn reconstruct_r(p: &ProfilePair) -> Result<WaveState> {
    let grid = p.grid();
    let h = grid.h();
    let u_plus = p.physical(Sign::Plus);
    let u_minus = p.physical(Sign::Minus);
    let mut r_hat = Spectrum::zeros(grid);
    let mut rt_hat = Spectrum::zeros(grid);
    for (i, k) in grid.modes().enumerate() {
        // single-speed transport phases e^{-+ ikt/h^2} (half the cross-term
        // translation rate)
        let shift = Complex64::new(0.0, -(k as f64) * p.t / (h * h)).exp();
        let a = shift * u_plus.coeffs()[i];
        let b = shift.conj() * u_minus.coeffs()[i];
        r_hat.coeffs_mut()[i] = a + b;
        rt_hat.coeffs_mut()[i] = -Complex64::new(0.0, gradient_symbol(h, k)) / (h * h) * (a - b);
    }
    Ok(WaveState {
        r: inverse_dft(&r_hat)?,
        r_t: inverse_dft(&rt_hat)?,
    })
}

/// Lattice Hamiltonian
/// `h * sum_x [ (h^2 (-Lap)^{-1/2} r_t)^2 / 2 + V(h^2 r)/h^4 ]` with
/// `V(y) = y^2/2 + y^3/6`; requires mean-zero `r_t`.
pub fn hamiltonian(w: &WaveState) -> Result<f64> {
    let grid = w.r.grid();
    let h = grid.h();
    let rt_hat = forward_dft(&w.r_t);
    let mean = rt_hat.mean_coefficient().norm();
    if mean > 1e-10 * rt_hat.linf().max(1.0) {
        return Err(Error::NonzeroMean(mean));
    }
    let mut half_inv = rt_hat;
    for (i, k) in grid.modes().enumerate() {
        half_inv.coeffs_mut()[i] *= if k == 0 {
            Complex64::ZERO
        } else {
            Complex64::new(h * h / gradient_symbol(h, k).abs(), 0.0)
        };
    }
    let kinetic_field = inverse_dft(&half_inv)?;
    let kinetic = 0.5 * h * kinetic_field.values().iter().map(|v| v * v).sum::<f64>();
    let h4 = h.powi(4);
    let potential = h * w
        .r
        .values()
        .iter()
        .map(|&r| {
            let y = h * h * r;
            (0.5 * y * y + y * y * y / 6.0) / h4
        })
        .sum::<f64>();
    Ok(kinetic + potential)
}

/// Direct cross-validation path: integrate
/// `r_tt = Lap r / h^4 + Lap(r^2) / (2 h^2)` as a first-order system with
/// classical RK4. The linear part is integrated explicitly, so stability
/// needs `dt` well below `h^3` (use small grids).
pub fn solve_wave_direct(
    w0: &WaveState,
    t_final: f64,
    dt: f64,
    opts: &SolveOptions,
) -> Result<Trajectory<WaveState>> {
    let steps = step_count(t_final, dt)?;
    let dt = t_final / steps as f64;
    let grid = w0.r.grid();
    let h = grid.h();
    let r0 = forward_dft(&w0.r);
    let rt0 = forward_dft(&w0.r_t);
    let limit = 1e6 * (r0.l2() + rt0.l2()).max(1.0);
    let lap: Vec<f64> = grid
        .modes()
        .map(|k| {
            let g = gradient_symbol(h, k);
            -g * g
        })
        .collect();
    let f = |_t: f64, v: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        let r = Spectrum::new(grid, v[0].clone()).expect("grid-sized");
        let mut accel: Vec<Complex64> = r
            .coeffs()
            .iter()
            .zip(&lap)
            .map(|(c, l)| c * l / h.powi(4))
            .collect();
        if opts.nonlinearity {
            let sq = spectral_product(&r, &r, ProductMode::Dealiased).expect("same grid");
            for (a, (c, l)) in accel.iter_mut().zip(sq.coeffs().iter().zip(&lap)) {
                *a += c * l / (2.0 * h * h);
            }
        }
        vec![v[1].clone(), accel]
    };
    let mut y = vec![r0.coeffs().to_vec(), rt0.coeffs().to_vec()];
    let mut states = Vec::with_capacity(steps + 1);
    states.push(w0.clone());
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        y = rk4_step(&y, t, dt, f);
        check_finite(&y[0], limit, step, t + dt)?;
        check_finite(&y[1], limit, step, t + dt)?;
        states.push(WaveState {
            r: inverse_dft(&Spectrum::new(grid, y[0].clone())?)?,
            r_t: inverse_dft(&Spectrum::new(grid, y[1].clone())?)?,
        });
    }
    Ok(Trajectory {
        dt,
        states,
        options: *opts,
    })
}
