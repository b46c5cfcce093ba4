//! Spectral solver for the counter-propagating KdV system on the continuum
//! torus, with the Airy propagator and conservation diagnostics.

use crate::error::Result;
use crate::fpu::{airy_dispersion, SolveOptions, Trajectory};
use crate::interp::ContinuumSpectrum;
use crate::ode::{check_finite, rk4_step, step_count};
use crate::spectral::transforms;
use crate::Sign;
use num_complex::Complex64;

/// Counter-propagating KdV profiles with the Airy flow factored out,
/// `W^{+-}(t) = S^{+-}(-t) w^{+-}(t)`, both mean-zero.
#[derive(Debug, Clone)]
pub struct KdvState {
    pub plus: ContinuumSpectrum,
    pub minus: ContinuumSpectrum,
    pub t: f64,
}

impl KdvState {
    pub fn new(plus: ContinuumSpectrum, minus: ContinuumSpectrum, t: f64) -> Self {
        KdvState { plus, minus, t }
    }

    pub fn cutoff(&self) -> usize {
        self.plus.cutoff()
    }

    pub fn spectrum(&self, sign: Sign) -> &ContinuumSpectrum {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// Physical-side spectrum `w^{+-}(t) = S^{+-}(t) W^{+-}(t)`.
    pub fn physical(&self, sign: Sign) -> ContinuumSpectrum {
        airy_apply(self.spectrum(sign), self.t, sign)
    }
}

/// Airy flow `S^{+-}(t)`: multiply `coeff(k)` by `e^{+- i t k^3/24}`.
pub fn airy_apply(s: &ContinuumSpectrum, t: f64, sign: Sign) -> ContinuumSpectrum {
    let mut out = s.clone();
    for k in s.modes() {
        let theta = sign.value() * t * airy_dispersion(k);
        let c = out.coeff(k) * Complex64::new(0.0, theta).exp();
        out.set_coeff(k, c);
    }
    out
}

/// Dealiased product of truncated continuum series:
/// `(1/sqrt(2*pi)) * sum_{k1+k2=k, |k|<=K} a(k1) b(k2)` with integer sums.
pub fn continuum_product(a: &ContinuumSpectrum, b: &ContinuumSpectrum) -> ContinuumSpectrum {
    debug_assert_eq!(a.cutoff(), b.cutoff());
    let m = transforms::fast_len(3 * a.cutoff() + 2);
    let pa = transforms::synthesize(m, a.modes().zip(a.coeffs().iter().copied()));
    let pb = transforms::synthesize(m, b.modes().zip(b.coeffs().iter().copied()));
    let prod: Vec<Complex64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    let coeffs = transforms::analyze(m, prod, a.modes());
    ContinuumSpectrum::new(a.cutoff(), coeffs).expect("window-sized")
}

fn rhs_one_sign(s: &KdvState, sign: Sign, nonlinearity: bool) -> ContinuumSpectrum {
    if !nonlinearity {
        return ContinuumSpectrum::zeros(s.cutoff());
    }
    let w = s.physical(sign);
    let sq = continuum_product(&w, &w);
    let mut out = sq;
    for k in out.modes() {
        let undo = Complex64::new(0.0, -sign.value() * s.t * airy_dispersion(k)).exp();
        let c = out.coeff(k) * Complex64::new(0.0, k as f64) * (-0.25 * sign.value()) * undo;
        out.set_coeff(k, c);
    }
    out.set_coeff(0, Complex64::ZERO);
    out
}

/// Time derivative of the Airy-conjugated profiles:
/// `dW^{+-}/dt = -+ 1/4 S^{+-}(-t) d_x (w^{+-})^2`.
pub fn rhs_kdv(s: &KdvState) -> (ContinuumSpectrum, ContinuumSpectrum) {
    (
        rhs_one_sign(s, Sign::Plus, true),
        rhs_one_sign(s, Sign::Minus, true),
    )
}

/// Integrate the KdV profile equations on `[0, T]` with classical RK4.
pub fn solve_kdv(s0: &KdvState, t_final: f64, dt: f64) -> Result<Trajectory<KdvState>> {
    let steps = step_count(t_final, dt)?;
    let dt = t_final / steps as f64;
    let cutoff = s0.cutoff();
    let limit = 1e6 * (s0.plus.l2() + s0.minus.l2()).max(1.0);
    let mut state = KdvState::new(s0.plus.clone(), s0.minus.clone(), 0.0);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(state.clone());
    for step in 1..=steps {
        let y = vec![state.plus.coeffs().to_vec(), state.minus.coeffs().to_vec()];
        let f = |t: f64, v: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            let probe = KdvState::new(
                ContinuumSpectrum::new(cutoff, v[0].clone()).expect("window-sized"),
                ContinuumSpectrum::new(cutoff, v[1].clone()).expect("window-sized"),
                t,
            );
            let (dp, dm) = rhs_kdv(&probe);
            vec![dp.coeffs().to_vec(), dm.coeffs().to_vec()]
        };
        let next = rk4_step(&y, state.t, dt, f);
        let t_next = step as f64 * dt;
        check_finite(&next[0], limit, step, t_next)?;
        check_finite(&next[1], limit, step, t_next)?;
        state = KdvState::new(
            ContinuumSpectrum::new(cutoff, next[0].clone())?,
            ContinuumSpectrum::new(cutoff, next[1].clone())?,
            t_next,
        );
        states.push(state.clone());
    }
    Ok(Trajectory {
        dt,
        states,
        options: SolveOptions::default(),
    })
}

/// `l^2` distance of two continuum spectra over the shared window.
pub fn l2_distance(a: &ContinuumSpectrum, b: &ContinuumSpectrum) -> f64 {
    debug_assert_eq!(a.cutoff(), b.cutoff());
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpu::dispersion;
    use std::f64::consts::PI;

    const SQRT_2PI: f64 = 2.5066282746310002;

    fn sine_profile(cutoff: usize, amp: f64) -> ContinuumSpectrum {
        let mut s = ContinuumSpectrum::zeros(cutoff);
        s.set_coeff(1, Complex64::new(0.0, -amp * SQRT_2PI / 2.0));
        s.set_coeff(-1, Complex64::new(0.0, amp * SQRT_2PI / 2.0));
        s
    }

    #[test]
    fn airy_identity_and_isometry() {
        let s = sine_profile(8, 1.0);
        let id = airy_apply(&s, 0.0, Sign::Plus);
        for k in s.modes() {
            assert!((id.coeff(k) - s.coeff(k)).norm() < 1e-15);
        }
        let moved = airy_apply(&s, 0.7, Sign::Minus);
        assert!((moved.l2() - s.l2()).abs() < 1e-13);
    }

    #[test]
    fn airy_moves_sine_by_t_over_24() {
        let s = sine_profile(4, 1.0);
        let t = 0.6;
        let moved = airy_apply(&s, t, Sign::Plus);
        for x in [-2.0, -0.4, 0.0, 1.1, 2.9] {
            let want = (x + t / 24.0).sin();
            assert!((moved.eval(x) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn airy_group_law() {
        let s = sine_profile(6, 0.8);
        let a = airy_apply(&airy_apply(&s, 0.3, Sign::Plus), 0.4, Sign::Plus);
        let b = airy_apply(&s, 0.7, Sign::Plus);
        for k in s.modes() {
            assert!((a.coeff(k) - b.coeff(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn rhs_zero_state_and_zero_mode() {
        let zero = KdvState::new(
            ContinuumSpectrum::zeros(8),
            ContinuumSpectrum::zeros(8),
            0.2,
        );
        let (dp, dm) = rhs_kdv(&zero);
        assert!(dp.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(dm.coeffs().iter().all(|c| c.norm() == 0.0));

        let s = KdvState::new(sine_profile(8, 1.0), sine_profile(8, 0.5), 0.1);
        let (dp, dm) = rhs_kdv(&s);
        assert_eq!(dp.coeff(0), Complex64::ZERO);
        assert_eq!(dm.coeff(0), Complex64::ZERO);
    }

    #[test]
    fn solve_conserves_mean_and_l2() {
        let s0 = KdvState::new(sine_profile(32, 1.0), sine_profile(32, 0.7), 0.0);
        let traj = solve_kdv(&s0, 0.2, 1e-3).unwrap();
        let l2_start = traj.states[0].plus.l2();
        for state in &traj.states {
            assert_eq!(state.plus.coeff(0), Complex64::ZERO);
            assert_eq!(state.minus.coeff(0), Complex64::ZERO);
        }
        let l2_end = traj.last().plus.l2();
        assert!(
            (l2_end - l2_start).abs() <= 1e-9 * l2_start,
            "L2 drift {}",
            (l2_end - l2_start).abs()
        );
    }

    #[test]
    fn solve_self_convergence_order_four() {
        let s0 = KdvState::new(sine_profile(16, 1.0), sine_profile(16, 1.0), 0.0);
        let t = 0.1;
        let reference = solve_kdv(&s0, t, 5e-4).unwrap();
        let coarse = solve_kdv(&s0, t, 4e-3).unwrap();
        let half = solve_kdv(&s0, t, 2e-3).unwrap();
        let err = |traj: &Trajectory<KdvState>| {
            l2_distance(&traj.last().plus, &reference.last().plus)
                + l2_distance(&traj.last().minus, &reference.last().minus)
        };
        let order = (err(&coarse) / err(&half)).log2();
        assert!(
            (3.8..=4.2).contains(&order),
            "observed order {order}, errors {} / {}",
            err(&coarse),
            err(&half)
        );
    }

    #[test]
    fn smooth_datum_keeps_bounded_h1() {
        // soliton-like smooth profile: a narrow positive bump (mean removed)
        let cutoff = 48;
        let mut s = ContinuumSpectrum::zeros(cutoff);
        for k in 1..=10i64 {
            let amp = 1.2 * (-0.4 * k as f64).exp();
            s.set_coeff(k, Complex64::new(amp, 0.0));
            s.set_coeff(-k, Complex64::new(amp, 0.0));
        }
        let h1_start = s.hs(1.0);
        let traj = solve_kdv(&KdvState::new(s.clone(), s, 0.0), 0.5, 1e-3).unwrap();
        for idx in traj.sample_indices(16) {
            let h1 = traj.states[idx].plus.hs(1.0);
            assert!(h1 <= 2.0 * h1_start, "H1 grew to {h1} from {h1_start}");
        }
    }

    #[test]
    fn lattice_and_airy_phases_stay_close() {
        // |e^{it s_h(k)} - e^{it k^3/24}| <= |t| h^2 |k|^5 / 1920
        for n in 1..=64usize {
            let h = PI / n as f64;
            for t in [0.1, 0.5, 1.0] {
                for k in 1..n as i64 {
                    let a = Complex64::new(0.0, t * dispersion(h, k)).exp();
                    let b = Complex64::new(0.0, t * airy_dispersion(k)).exp();
                    let bound = t * h * h * (k as f64).powi(5) / 1920.0;
                    assert!(
                        (a - b).norm() <= bound * (1.0 + 1e-12) + 1e-15,
                        "N={n} k={k} t={t}"
                    );
                }
            }
        }
    }
}
