//! Classical RK4 stepping over small blocks of complex coefficient vectors,
//! shared by the lattice and continuum solvers.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub(crate) fn rk4_step<F>(y: &[Vec<Complex64>], t: f64, dt: f64, f: F) -> Vec<Vec<Complex64>>
where
    F: Fn(f64, &[Vec<Complex64>]) -> Vec<Vec<Complex64>>,
{
    let shift = |base: &[Vec<Complex64>], a: f64, d: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        base.iter()
            .zip(d)
            .map(|(b, k)| b.iter().zip(k).map(|(x, y)| x + a * y).collect())
            .collect()
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &shift(y, 0.5 * dt, &k1));
    let k3 = f(t + 0.5 * dt, &shift(y, 0.5 * dt, &k2));
    let k4 = f(t + dt, &shift(y, dt, &k3));
    y.iter()
        .enumerate()
        .map(|(j, b)| {
            b.iter()
                .enumerate()
                .map(|(i, x)| {
                    x + dt / 6.0 * (k1[j][i] + 2.0 * k2[j][i] + 2.0 * k3[j][i] + k4[j][i])
                })
                .collect()
        })
        .collect()
}

pub(crate) fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need T > 0 and dt > 0, got T = {t_final}, dt = {dt}"
        )));
    }
    Ok(((t_final / dt).round() as usize).max(1))
}

/// Blow-up guard: all entries finite and the `l^2` size below `limit`.
pub(crate) fn check_finite(coeffs: &[Complex64], limit: f64, step: usize, t: f64) -> Result<()> {
    let mut sq = 0.0;
    for c in coeffs {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::BlowUp { step, t });
        }
        sq += c.norm_sqr();
    }
    if sq.sqrt() > limit {
        return Err(Error::BlowUp { step, t });
    }
    Ok(())
}
