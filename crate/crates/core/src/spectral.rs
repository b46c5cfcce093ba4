//! Discrete Fourier analysis on the lattice torus: transforms with the
//! `h/sqrt(2*pi)` normalization, the discrete multiplier calculus, lattice
//! norms, and spectral products (circular or dealiased).

use crate::error::{Error, Result};
use crate::grid::LatticeGrid;
use crate::INV_SQRT_2PI;
use num_complex::Complex64;

/// Relative tolerance above which a spectrum is rejected as non-Hermitian.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Real samples on the lattice torus, slot `i` holding `f(h*(i-N))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: LatticeGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: LatticeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(values.len(), grid.points()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite field value".into()));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: LatticeGrid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.points()],
        }
    }

    /// Sample a function at the lattice points.
    pub fn from_fn(grid: LatticeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.points()).map(|i| f(grid.x_at(i))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Trapezoid-free lattice integral `h * sum_x f(x)`.
    pub fn integral(&self) -> f64 {
        self.grid.h() * self.values.iter().sum::<f64>()
    }
}

/// Fourier coefficients over the dual window `k = -N, ..., N-1`.
///
/// Spectra of real fields are Hermitian (`c(-k) = conj(c(k))`); the unpaired
/// Nyquist slot `k = -N` is projected to zero so that odd multipliers keep
/// real fields real.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: LatticeGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: LatticeGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.points() {
            return Err(Error::GridMismatch(coeffs.len(), grid.points()));
        }
        let mut s = Spectrum { grid, coeffs };
        s.project_nyquist();
        Ok(s)
    }

    pub fn zeros(grid: LatticeGrid) -> Self {
        Spectrum {
            grid,
            coeffs: vec![Complex64::ZERO; grid.points()],
        }
    }

    pub fn grid(&self) -> LatticeGrid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    pub fn set_coeff(&mut self, k: i64, c: Complex64) {
        let i = self.grid.index_of(k);
        self.coeffs[i] = c;
    }

    /// Zero the unpaired Nyquist slot `k = -N`.
    pub fn project_nyquist(&mut self) {
        self.coeffs[0] = Complex64::ZERO;
    }

    /// `true` when `coeff(0)` vanishes to roundoff.
    pub fn is_mean_zero(&self) -> bool {
        self.coeff(0).norm() <= 1e-12 * self.linf().max(1.0)
    }

    pub fn mean_coefficient(&self) -> Complex64 {
        self.coeff(0)
    }

    /// Largest coefficient magnitude.
    pub fn linf(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Plain `l^2` norm of the coefficients (equals the field `L^2` norm).
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max deviation from Hermitian symmetry, absolute.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.grid.n() as i64;
        let mut worst = self.coeff(0).im.abs().max(self.coeff(-n).im.abs());
        for k in 1..n {
            let d = (self.coeff(-k) - self.coeff(k).conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    fn check_hermitian(&self) -> Result<()> {
        let defect = self.symmetry_defect();
        if defect > SYMMETRY_TOL * self.linf().max(1.0) {
            return Err(Error::SymmetryViolation(defect));
        }
        Ok(())
    }
}

/// The discrete Fourier multipliers of the lattice calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbol {
    /// Symmetric difference quotient: symbol `(2i/h) sin(hk/2)`.
    Gradient,
    /// `|(2/h) sin(hk/2)|`, the square root of the (negated) Laplacian symbol.
    GradientAbs,
    /// `<(2/h) sin(hk/2)>` with `<y> = sqrt(1 + y^2)`.
    GradientBracket,
    /// Exact derivative on the window: symbol `ik`.
    ExactDerivative,
    /// Second difference quotient: symbol `-(4/h^2) sin^2(hk/2)`.
    Laplacian,
    /// Inverse of `Gradient`; only defined on mean-zero spectra.
    GradientInverse,
    /// `<k>^s` smoothing/roughening weight.
    BracketPower(f64),
}

/// Gradient symbol divided by `i`: `(2/h) sin(hk/2)`.
pub fn gradient_symbol(h: f64, k: i64) -> f64 {
    2.0 / h * (0.5 * h * k as f64).sin()
}

/// `<y> = (1 + y^2)^(1/2)`.
pub fn bracket(y: f64) -> f64 {
    y.mul_add(y, 1.0).sqrt()
}

/// `F_h(f)(k) = (h/sqrt(2*pi)) * sum_x f(x) e^{-ixk}`, Nyquist projected.
pub fn forward_dft(f: &Field) -> Spectrum {
    let m = f.grid.points();
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transforms::fft_in_place(&mut buf, false);
    let scale = f.grid.h() * INV_SQRT_2PI;
    let coeffs = (0..m)
        .map(|i| {
            let k = f.grid.mode_at(i);
            parity(k) * scale * buf[k.rem_euclid(m as i64) as usize]
        })
        .collect();
    let mut s = Spectrum {
        grid: f.grid,
        coeffs,
    };
    s.project_nyquist();
    s
}

/// `f(x) = (1/sqrt(2*pi)) * sum_k c(k) e^{ixk}`; rejects non-Hermitian input.
pub fn inverse_dft(s: &Spectrum) -> Result<Field> {
    s.check_hermitian()?;
    let m = s.grid.points();
    let mut buf = vec![Complex64::ZERO; m];
    for i in 0..m {
        let k = s.grid.mode_at(i);
        buf[k.rem_euclid(m as i64) as usize] = parity(k) * s.coeffs[i] * INV_SQRT_2PI;
    }
    transforms::fft_in_place(&mut buf, true);
    let values = buf.iter().map(|c| c.re).collect();
    Ok(Field {
        grid: s.grid,
        values,
    })
}

/// Apply a diagonal multiplier from the lattice calculus.
pub fn apply_symbol(s: &Spectrum, symbol: Symbol) -> Result<Spectrum> {
    let h = s.grid.h();
    if let Symbol::GradientInverse = symbol {
        let mean = s.coeff(0).norm();
        if mean > 1e-12 * s.linf().max(1.0) {
            return Err(Error::NonzeroMean(mean));
        }
    }
    let mut out = s.clone();
    for i in 0..out.coeffs.len() {
        let k = s.grid.mode_at(i);
        let g = gradient_symbol(h, k);
        out.coeffs[i] *= match symbol {
            Symbol::Gradient => Complex64::new(0.0, g),
            Symbol::GradientAbs => Complex64::new(g.abs(), 0.0),
            Symbol::GradientBracket => Complex64::new(bracket(g), 0.0),
            Symbol::ExactDerivative => Complex64::new(0.0, k as f64),
            Symbol::Laplacian => Complex64::new(-g * g, 0.0),
            Symbol::GradientInverse => {
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, g).finv()
                }
            }
            Symbol::BracketPower(p) => Complex64::new(bracket(k as f64).powf(p), 0.0),
        };
    }
    Ok(out)
}

/// Discrete right derivative `(f(x+h) - f(x))/h` with periodic wrap.
pub fn forward_difference(f: &Field) -> Field {
    let m = f.grid.points();
    let h = f.grid.h();
    let values = (0..m)
        .map(|i| (f.values[(i + 1) % m] - f.values[i]) / h)
        .collect();
    Field {
        grid: f.grid,
        values,
    }
}

/// `(h * sum |f|^p)^(1/p)`, or `sup |f|` for `p = inf`. Requires `p >= 1`.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "Lp norm needs p >= 1, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    let h = f.grid.h();
    Ok((h * f.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p))
}

/// Sobolev norm `(sum <k>^{2s} |c(k)|^2)^(1/2)` over the dual window.
pub fn hs_norm(s: &Spectrum, order: f64) -> f64 {
    s.grid
        .modes()
        .map(|k| bracket(k as f64).powf(2.0 * order) * s.coeff(k).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Equivalent-norm probe using the lattice bracket `<(2/h) sin(hk/2)>^s`.
pub fn hs_norm_lattice_bracket(s: &Spectrum, order: f64) -> f64 {
    let h = s.grid.h();
    s.grid
        .modes()
        .map(|k| bracket(gradient_symbol(h, k)).powf(2.0 * order) * s.coeff(k).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// How the quadratic interactions treat frequencies outside the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    /// Circular convolution over `Z_{2N}` (pointwise product on the lattice).
    Circular,
    /// 3/2-rule zero padding: integer frequency sums, window-truncated.
    Dealiased,
}

/// `F_h(f*g)`-style product of two spectra,
/// `(1/sqrt(2*pi)) * sum_{k1+k2=k} a(k1) b(k2)` with the mode's aliasing rule.
pub fn spectral_product(a: &Spectrum, b: &Spectrum, mode: ProductMode) -> Result<Spectrum> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(a.grid.points(), b.grid.points()));
    }
    let n = a.grid.n();
    let m = match mode {
        ProductMode::Circular => 2 * n,
        ProductMode::Dealiased => transforms::fast_len(3 * n),
    };
    let pa = transforms::synthesize(m, a.grid.modes().zip(a.coeffs.iter().copied()));
    let pb = transforms::synthesize(m, b.grid.modes().zip(b.coeffs.iter().copied()));
    let prod: Vec<Complex64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    let coeffs = transforms::analyze(m, prod, a.grid.modes());
    let mut out = Spectrum {
        grid: a.grid,
        coeffs,
    };
    out.project_nyquist();
    Ok(out)
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// FFT plumbing shared by the lattice and continuum sides.
pub(crate) mod transforms {
    use super::{parity, Complex64, INV_SQRT_2PI};
    use rustfft::{Fft, FftPlanner};
    use std::cell::RefCell;
    use std::collections::HashMap;
    use std::f64::consts::PI;
    use std::sync::Arc;

    type PlanCache = (FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>);

    thread_local! {
        static PLANS: RefCell<PlanCache> = RefCell::new((FftPlanner::new(), HashMap::new()));
    }

    pub fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
        let len = buf.len();
        PLANS.with(|cell| {
            let (planner, cache) = &mut *cell.borrow_mut();
            let plan = cache
                .entry((len, inverse))
                .or_insert_with(|| {
                    if inverse {
                        planner.plan_fft_inverse(len)
                    } else {
                        planner.plan_fft_forward(len)
                    }
                })
                .clone();
            plan.process(buf);
        });
    }

    /// Smallest length `>= min` with prime factors in {2, 3, 5}.
    pub fn fast_len(min: usize) -> usize {
        let mut m = min.max(2);
        loop {
            let mut r = m;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            if r == 1 {
                return m;
            }
            m += 1;
        }
    }

    /// Physical samples `(1/sqrt(2*pi)) * sum_k c_k e^{i x_j k}` on an
    /// `m`-point grid with `x_j = -pi + 2*pi*j/m`.
    pub fn synthesize(m: usize, coeffs: impl Iterator<Item = (i64, Complex64)>) -> Vec<Complex64> {
        let mut buf = vec![Complex64::ZERO; m];
        for (k, c) in coeffs {
            buf[k.rem_euclid(m as i64) as usize] += parity(k) * c * INV_SQRT_2PI;
        }
        fft_in_place(&mut buf, true);
        buf
    }

    /// Coefficients `(h_m/sqrt(2*pi)) * sum_j f_j e^{-i x_j k}` of an
    /// `m`-point physical grid, extracted at the requested frequencies.
    pub fn analyze(
        m: usize,
        mut phys: Vec<Complex64>,
        out_modes: impl Iterator<Item = i64>,
    ) -> Vec<Complex64> {
        fft_in_place(&mut phys, false);
        let scale = 2.0 * PI / m as f64 * INV_SQRT_2PI;
        out_modes
            .map(|k| parity(k) * scale * phys[k.rem_euclid(m as i64) as usize])
            .collect()
    }
}
