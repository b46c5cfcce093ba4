//! Piecewise-linear interpolation from the lattice torus to the continuum
//! torus, as a pointwise evaluator and as a Fourier multiplier with its
//! alias structure, plus the error/boundedness diagnostics built on it.

use crate::error::{Error, Result};
use crate::spectral::{bracket, forward_dft, Field, Spectrum};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Truncated Fourier series of a function on the continuum torus,
/// coefficients over `k = -K, ..., K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumSpectrum {
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl ContinuumSpectrum {
    pub fn new(cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * cutoff + 1 {
            return Err(Error::GridMismatch(coeffs.len(), 2 * cutoff + 1));
        }
        if !coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(ContinuumSpectrum { cutoff, coeffs })
    }

    pub fn zeros(cutoff: usize) -> Self {
        ContinuumSpectrum {
            cutoff,
            coeffs: vec![Complex64::ZERO; 2 * cutoff + 1],
        }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs[(k + self.cutoff as i64) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, c: Complex64) {
        let i = (k + self.cutoff as i64) as usize;
        self.coeffs[i] = c;
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let k = self.cutoff as i64;
        -k..=k
    }

    /// `L^2(T)` norm of the truncated series (Plancherel).
    pub fn l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn linf_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sobolev norm `(sum <k>^{2s} |c(k)|^2)^(1/2)`.
    pub fn hs(&self, order: f64) -> f64 {
        self.modes()
            .map(|k| bracket(k as f64).powf(2.0 * order) * self.coeff(k).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluate the series at a point.
    pub fn eval(&self, x: f64) -> f64 {
        let sum: Complex64 = self
            .modes()
            .map(|k| self.coeff(k) * Complex64::new(0.0, k as f64 * x).exp())
            .sum();
        sum.re * crate::INV_SQRT_2PI
    }

    pub fn is_mean_zero(&self) -> bool {
        self.coeff(0).norm() <= 1e-12 * self.linf_coeff().max(1.0)
    }
}

/// Evaluate the piecewise-linear interpolant of a lattice field at `x`.
///
/// On the cell `[hj, hj+h)` the value is `f(hj) + (f(hj+h)-f(hj))/h * (x-hj)`
/// with periodic wrap at the last cell.
pub fn evaluate_piecewise(f: &Field, x: f64) -> f64 {
    let grid = f.grid();
    let h = grid.h();
    let m = grid.points();
    // map x into [-pi, pi)
    let xw = x - (2.0 * PI) * ((x + PI) / (2.0 * PI)).floor();
    let mut cell = ((xw + PI) / h).floor() as i64;
    cell = cell.clamp(0, m as i64 - 1);
    let i = cell as usize;
    let x0 = grid.x_at(i);
    let left = f.values()[i];
    let right = f.values()[(i + 1) % m];
    left + (right - left) / h * (xw - x0)
}

/// The interpolation multiplier `(4/(h^2 k^2)) sin^2(hk/2)`, with the value
/// `1` at `k = 0` by continuity.
pub fn interpolation_multiplier(h: f64, k: i64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let hk = h * k as f64;
    let s = (0.5 * hk).sin();
    4.0 * s * s / (hk * hk)
}

/// Continuum Fourier coefficients of the interpolant of a lattice spectrum:
/// `F(L_h f)(k) = mult(k) * F_h(f)(k - 2Nn)` with the alias branch `n`
/// chosen so that `|k - 2Nn| <= N`.
pub fn interpolate_spectrum(s: &Spectrum, cutoff: usize) -> ContinuumSpectrum {
    let grid = s.grid();
    let h = grid.h();
    let two_n = grid.points() as i64;
    let mut out = ContinuumSpectrum::zeros(cutoff);
    for k in out.modes() {
        // fold k into [-N, N); F_h is 2N-periodic and the Nyquist slot is zero
        let mut alias = k.rem_euclid(two_n);
        if alias >= two_n / 2 {
            alias -= two_n;
        }
        let c = s.coeff(alias) * interpolation_multiplier(h, k);
        out.set_coeff(k, c);
    }
    out
}

/// Interpolation coefficients of a lattice field up to frequency `cutoff`.
pub fn interpolate_coeffs(f: &Field, cutoff: usize) -> ContinuumSpectrum {
    interpolate_spectrum(&forward_dft(f), cutoff)
}

/// Integral of the interpolant over the torus, in closed form
/// `(h/2) * sum_x (f(x+h) + f(x))`; equals the lattice integral exactly.
pub fn mean_of_interpolant(f: &Field) -> f64 {
    let m = f.grid().points();
    let h = f.grid().h();
    0.5 * h
        * (0..m)
            .map(|i| f.values()[(i + 1) % m] + f.values()[i])
            .sum::<f64>()
}

/// `l^2` distance between the interpolant's low-frequency coefficients and
/// the lattice coefficients: `(sum_{|k|<=N} |F(L_h f)(k) - F_h(f)(k)|^2)^(1/2)`.
pub fn low_freq_discrepancy(f: &Field) -> f64 {
    let s = forward_dft(f);
    let n = f.grid().n() as i64;
    let interp = interpolate_spectrum(&s, n as usize);
    let mut acc = 0.0;
    for k in -n..=n {
        let lattice = if k == n { s.coeff(-n) } else { s.coeff(k) };
        acc += (interp.coeff(k) - lattice).norm_sqr();
    }
    acc.sqrt()
}

/// `L^2(T)` norm of the `|k| > N` part of the interpolant, truncated at
/// `cutoff`. Errors when `cutoff < N`; `cutoff >= 4N` keeps the truncation
/// error below 1%.
pub fn tail_norm(f: &Field, cutoff: usize) -> Result<f64> {
    let n = f.grid().n();
    if cutoff < n {
        return Err(Error::InvalidParameter(format!(
            "tail cutoff {cutoff} is below pi/h = {n}"
        )));
    }
    let interp = interpolate_coeffs(f, cutoff);
    let acc: f64 = interp
        .modes()
        .filter(|k| k.unsigned_abs() as usize > n)
        .map(|k| interp.coeff(k).norm_sqr())
        .sum();
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LatticeGrid;
    use crate::harness::fit_rate;
    use crate::spectral::{hs_norm, inverse_dft};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const SQRT_2PI: f64 = 2.5066282746310002;

    fn random_field(n: usize, rng: &mut ChaCha8Rng) -> Field {
        let grid = LatticeGrid::new(n).unwrap();
        let raw = Field::new(
            grid,
            (0..grid.points())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        )
        .unwrap();
        inverse_dft(&forward_dft(&raw)).unwrap()
    }

    #[test]
    fn interpolant_reproduces_nodes_and_midpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_field(8, &mut rng);
        let grid = f.grid();
        for i in 0..grid.points() {
            let x = grid.x_at(i);
            assert!((evaluate_piecewise(&f, x) - f.values()[i]).abs() < 1e-13);
            let mid = x + 0.5 * grid.h();
            let avg = 0.5 * (f.values()[i] + f.values()[(i + 1) % grid.points()]);
            assert!((evaluate_piecewise(&f, mid) - avg).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolant_of_constant_is_constant() {
        let grid = LatticeGrid::new(4).unwrap();
        let f = Field::from_fn(grid, |_| 2.5);
        for j in 0..100 {
            let x = -PI + 2.0 * PI * j as f64 / 100.0;
            assert!((evaluate_piecewise(&f, x) - 2.5).abs() < 1e-13);
        }
        // constant c -> only the k = 0 coefficient survives
        let spec = interpolate_coeffs(&f, 3 * grid.n());
        assert!((spec.coeff(0) - Complex64::new(2.5 * SQRT_2PI, 0.0)).norm() < 1e-12);
        for k in spec.modes() {
            if k != 0 {
                assert!(spec.coeff(k).norm() < 1e-12, "mode {k}");
            }
        }
    }

    #[test]
    fn multiplier_value_example() {
        // N = 4, k = 2: (4/(h^2 k^2)) sin^2(hk/2) = 8/pi^2
        let h = PI / 4.0;
        let m = interpolation_multiplier(h, 2);
        assert!((m - 8.0 / (PI * PI)).abs() < 1e-14);
        assert!((m - 0.81057).abs() < 1e-5);
        assert_eq!(interpolation_multiplier(h, 0), 1.0);
    }

    #[test]
    fn coefficients_match_trapezoid_quadrature_of_evaluator() {
        // independent oracle: cell-aligned composite trapezoid quadrature of
        // L_h f against e^{-ikx}, Richardson-refined once
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = random_field(4, &mut rng);
        let grid = f.grid();
        let spec = interpolate_coeffs(&f, 5);
        let quad = |k: i64, sub: usize| -> Complex64 {
            let mut acc = Complex64::ZERO;
            let m = grid.points() * sub;
            let step = 2.0 * PI / m as f64;
            for j in 0..m {
                let x0 = -PI + step * j as f64;
                let x1 = x0 + step;
                let g0 = evaluate_piecewise(&f, x0) * Complex64::new(0.0, -(k as f64) * x0).exp();
                let g1 = evaluate_piecewise(&f, x1) * Complex64::new(0.0, -(k as f64) * x1).exp();
                acc += 0.5 * step * (g0 + g1);
            }
            acc * crate::INV_SQRT_2PI
        };
        for k in spec.modes() {
            let coarse = quad(k, 256);
            let fine = quad(k, 512);
            let oracle = (4.0 * fine - coarse) / 3.0;
            assert!(
                (spec.coeff(k) - oracle).norm() < 1e-10,
                "mode {k}: {} vs {}",
                spec.coeff(k),
                oracle
            );
        }
    }

    #[test]
    fn evaluator_and_synthesized_coefficients_agree() {
        // the interpolant's coefficients decay like k^{-2}, so the truncated
        // synthesis at K = 8N carries a ~N^{-2} sup tail: a fine grid brings
        // it below 1e-6
        let grid = LatticeGrid::new(512).unwrap();
        let f = Field::from_fn(grid, f64::sin);
        let spec = interpolate_coeffs(&f, 8 * grid.n());
        let mut worst: f64 = 0.0;
        for j in 0..1000 {
            let x = -PI + 2.0 * PI * j as f64 / 1000.0;
            worst = worst.max((spec.eval(x) - evaluate_piecewise(&f, x)).abs());
        }
        assert!(worst < 1e-6, "sup deviation {worst}");
    }

    #[test]
    fn mean_invariance_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 8, 64] {
            let f = random_field(n, &mut rng);
            let lhs = mean_of_interpolant(&f);
            let rhs = f.integral();
            assert!((lhs - rhs).abs() < 1e-14 * rhs.abs().max(1.0));
        }
        let grid = LatticeGrid::new(8).unwrap();
        let one = Field::from_fn(grid, |_| 1.0);
        assert!((mean_of_interpolant(&one) - 2.0 * PI).abs() < 1e-13);

        // mean-zero field -> 0
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut f = random_field(8, &mut rng);
        let mean = f.integral() / (2.0 * PI);
        for v in f.values_mut() {
            *v -= mean;
        }
        assert!(mean_of_interpolant(&f).abs() < 1e-13);
    }

    #[test]
    fn low_freq_discrepancy_examples() {
        let grid = LatticeGrid::new(8).unwrap();
        let constant = Field::from_fn(grid, |_| 1.0);
        assert!(low_freq_discrepancy(&constant) < 1e-12);

        // single mode k0: |mult(k0) - 1| * |F_h(f)(k0)| (two conjugate slots)
        let f = Field::from_fn(grid, f64::cos);
        let h = grid.h();
        let expected =
            ((interpolation_multiplier(h, 1) - 1.0) * SQRT_2PI / 2.0).abs() * 2.0_f64.sqrt();
        assert!((low_freq_discrepancy(&f) - expected).abs() < 1e-12);
    }

    #[test]
    fn low_freq_discrepancy_second_order_slope() {
        let smooth = |x: f64| x.sin() + 0.5 * (2.0 * x).cos();
        let mut points = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let grid = LatticeGrid::new(n).unwrap();
            let f = Field::from_fn(grid, smooth);
            points.push((grid.h(), low_freq_discrepancy(&f)));
        }
        let fit = fit_rate(&points).unwrap();
        assert!(fit.slope >= 1.9, "slope {}", fit.slope);
    }

    #[test]
    fn tail_norm_behaviour() {
        let grid = LatticeGrid::new(8).unwrap();
        let constant = Field::from_fn(grid, |_| 1.0);
        assert!(tail_norm(&constant, 4 * grid.n()).unwrap() < 1e-12);
        assert!(tail_norm(&constant, grid.n() - 1).is_err());

        // H^1-normalized random fields: tail ~ h, slope >= 0.9
        let mut points = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + n as u64);
            let mut f = random_field(n, &mut rng);
            let scale = hs_norm(&forward_dft(&f), 1.0);
            for v in f.values_mut() {
                *v /= scale;
            }
            points.push((f.grid().h(), tail_norm(&f, 4 * n).unwrap()));
        }
        let fit = fit_rate(&points).unwrap();
        assert!(fit.slope >= 0.9, "slope {}", fit.slope);

        // doubling the truncation beyond 4N moves the value by < 1%
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let f = random_field(16, &mut rng);
        let t4 = tail_norm(&f, 4 * 16).unwrap();
        let t8 = tail_norm(&f, 8 * 16).unwrap();
        assert!((t8 - t4).abs() <= 0.01 * t4, "t4 {t4} t8 {t8}");
    }

    #[test]
    fn interpolation_boundedness_probe() {
        // max over 100 random fields of ||L_h f||_{H^s} / ||f||_{H^s},
        // recorded per N; the curve must stay flat (no growth in N)
        for s in [0.0, 0.5, 1.0] {
            let mut per_n = Vec::new();
            for n in [8usize, 16, 32, 64, 128] {
                let mut rng = ChaCha8Rng::seed_from_u64(7000 + n as u64);
                let mut worst: f64 = 0.0;
                for _ in 0..100 {
                    let f = random_field(n, &mut rng);
                    let lattice = hs_norm(&forward_dft(&f), s);
                    let cont = interpolate_coeffs(&f, 4 * n).hs(s);
                    worst = worst.max(cont / lattice);
                }
                per_n.push(worst);
            }
            let max_all = per_n.iter().copied().fold(0.0, f64::max);
            assert!(
                max_all <= 2.0 * per_n[0],
                "s = {s}: ratios {per_n:?} grow with N"
            );
        }
    }
}
