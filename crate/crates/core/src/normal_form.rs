//! Normal-form machinery for the decoupled lattice system and the KdV
//! system: resonance functions, the boundary and iterated multilinear forms
//! produced by integrating the quadratic term by parts in time, the
//! resonant-set decomposition, and residual verification of the resulting
//! regularized integral identities along computed trajectories.

use crate::error::{Error, Result};
use crate::fpu::{ProfilePair, SystemKind, Trajectory};
use crate::interp::ContinuumSpectrum;
use crate::kdv::KdvState;
use crate::spectral::Spectrum;
use crate::{Sign, INV_SQRT_2PI};
use num_complex::Complex64;
use rayon::prelude::*;

/// Which dispersion law a resonance value refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResonanceSystem {
    /// Lattice phases built from `s_h(k)`; carries the mesh.
    Fpu { h: f64 },
    /// Continuum phases built from `k^3/24`.
    Kdv,
}

/// Phase mismatch of a multilinear interaction `k = k_1 + ... + k_m`
/// (`m = 2, 3, 4`). Errors when the frequency-sum constraint fails.
pub fn resonance(system: ResonanceSystem, output: i64, inputs: &[i64]) -> Result<f64> {
    if output != inputs.iter().sum::<i64>() {
        return Err(Error::InvalidParameter(format!(
            "frequency-sum constraint violated: {output} != sum{inputs:?}"
        )));
    }
    let value = match (system, inputs) {
        (ResonanceSystem::Fpu { h }, [k1, k2]) => lattice_res2(h, output, *k1, *k2),
        (ResonanceSystem::Fpu { h }, [k1, k2, k3]) => lattice_res3(h, *k1, *k2, *k3),
        (ResonanceSystem::Fpu { h }, [k1, k2, k3, k4]) => {
            lattice_res3(h, k1 + k2, *k3, *k4) + lattice_res2(h, k1 + k2, *k1, *k2)
        }
        (ResonanceSystem::Kdv, [k1, k2]) => continuum_res2(output, *k1, *k2),
        (ResonanceSystem::Kdv, [k1, k2, k3]) => continuum_res3(*k1, *k2, *k3),
        (ResonanceSystem::Kdv, [k1, k2, k3, k4]) => {
            continuum_res3(k1 + k2, *k3, *k4) + continuum_res2(k1 + k2, *k1, *k2)
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "resonance order {} not in 2..=4",
                inputs.len()
            )))
        }
    };
    Ok(value)
}

/// `-(8/h^3) sin(h k1/4) sin(h k2/4) sin(h k/4)` on `k = k1 + k2`.
pub fn lattice_res2(h: f64, k: i64, k1: i64, k2: i64) -> f64 {
    let q = 0.25 * h;
    -8.0 / (h * h * h) * (q * k1 as f64).sin() * (q * k2 as f64).sin() * (q * k as f64).sin()
}

/// `-(8/h^3) sin(h(k1+k2)/4) sin(h(k2+k3)/4) sin(h(k3+k1)/4)`.
pub fn lattice_res3(h: f64, k1: i64, k2: i64, k3: i64) -> f64 {
    let q = 0.25 * h;
    -8.0 / (h * h * h)
        * (q * (k1 + k2) as f64).sin()
        * (q * (k2 + k3) as f64).sin()
        * (q * (k3 + k1) as f64).sin()
}

/// `-k k1 k2 / 8` on `k = k1 + k2`.
pub fn continuum_res2(k: i64, k1: i64, k2: i64) -> f64 {
    -(k as f64) * (k1 as f64) * (k2 as f64) / 8.0
}

/// `-(k1+k2)(k2+k3)(k1+k3) / 8`.
pub fn continuum_res3(k1: i64, k2: i64, k3: i64) -> f64 {
    -((k1 + k2) as f64) * ((k2 + k3) as f64) * ((k1 + k3) as f64) / 8.0
}

/// The normal-form terms of one system, all producing spectra on the
/// system's own frequency window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormLevel {
    /// The quadratic right-hand side itself (profile time derivative).
    Quadratic,
    /// Quadratic boundary form: the right-hand side divided by its phase.
    QuadraticBoundary,
    /// Cubic boundary form over the non-resonant triples.
    CubicBoundary,
    /// Quartic integrand: cubic boundary form with one slot differentiated,
    /// in the grouping `B3(dV, V, V) + 2 B3(V, V, dV)`.
    Quartic,
    /// Diagonal cubic resonance (`k1 = -k2 = k3 = k`).
    ResonantStrong,
    /// Off-diagonal resonant pairs; carries an extra mesh factor on the
    /// lattice and cancels identically for KdV.
    ResonantWeak,
}

/// Resonant triples, split into the diagonal and off-diagonal families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonantSubset {
    Diagonal,
    OffDiagonal,
    All,
}

// ---------------------------------------------------------------------
// generic evaluation over integer frequency windows
// ---------------------------------------------------------------------

/// Contiguous frequency window `lo ..= lo + len - 1` over borrowed
/// coefficients.
#[derive(Clone, Copy)]
struct View<'a> {
    lo: i64,
    c: &'a [Complex64],
}

impl<'a> View<'a> {
    fn hi(&self) -> i64 {
        self.lo + self.c.len() as i64 - 1
    }

    fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi()
    }

    fn get(&self, k: i64) -> Complex64 {
        self.c[(k - self.lo) as usize]
    }

    fn modes(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi()
    }
}

trait NfSystem: Sync {
    /// Derivative symbol divided by `i`: `(2/h) sin(hk/2)` or `k`.
    fn mu(&self, k: i64) -> f64;
    fn res2(&self, k: i64, k1: i64, k2: i64) -> f64;
    fn res3(&self, k: i64, k1: i64, k2: i64, k3: i64) -> f64;
    /// Strength of the iterated cubic term at outer slot `k1` and inner
    /// pair-sum `inter = k2 + k3`; the full coefficient is
    /// `sign * i * rho3 / (2*pi)` with unit resonant phase.
    fn rho3(&self, k: i64, k1: i64, inter: i64) -> f64;
    /// `res3` as a polynomial `c0 + c1*k2 + c2*k2^2` in the middle slot for
    /// fixed `(k, k1)`, when it has that shape (drives a rotation
    /// recurrence instead of per-term `cis`).
    fn res3_quadratic(&self, _k: i64, _k1: i64) -> Option<(f64, f64, f64)> {
        None
    }
}

struct LatticeNf {
    h: f64,
    // quarter-angle tables indexed by m + off, |m| <= off
    sin4: Vec<f64>,
    cos4: Vec<f64>,
    off: i64,
}

impl LatticeNf {
    fn new(h: f64, n: usize) -> Self {
        let off = 4 * n as i64 + 4;
        let q = 0.25 * h;
        let sin4 = (-off..=off).map(|m| (q * m as f64).sin()).collect();
        let cos4 = (-off..=off).map(|m| (q * m as f64).cos()).collect();
        LatticeNf { h, sin4, cos4, off }
    }

    fn s4(&self, m: i64) -> f64 {
        self.sin4[(m + self.off) as usize]
    }

    fn c4(&self, m: i64) -> f64 {
        self.cos4[(m + self.off) as usize]
    }
}

impl NfSystem for LatticeNf {
    fn mu(&self, k: i64) -> f64 {
        2.0 / self.h * self.s4(2 * k)
    }

    fn res2(&self, k: i64, k1: i64, k2: i64) -> f64 {
        -8.0 / (self.h * self.h * self.h) * self.s4(k1) * self.s4(k2) * self.s4(k)
    }

    fn res3(&self, k: i64, k1: i64, k2: i64, _k3: i64) -> f64 {
        // pair sums (k1+k2, k2+k3, k3+k1) = (k1+k2, k-k1, k-k2)
        -8.0 / (self.h * self.h * self.h) * self.s4(k1 + k2) * self.s4(k - k1) * self.s4(k - k2)
    }

    fn rho3(&self, k: i64, k1: i64, inter: i64) -> f64 {
        0.5 * self.h * self.c4(k) * self.c4(inter) / self.s4(k1)
    }
}

struct ContinuumNf;

impl NfSystem for ContinuumNf {
    fn mu(&self, k: i64) -> f64 {
        k as f64
    }

    fn res2(&self, k: i64, k1: i64, k2: i64) -> f64 {
        continuum_res2(k, k1, k2)
    }

    fn res3(&self, _k: i64, k1: i64, k2: i64, k3: i64) -> f64 {
        continuum_res3(k1, k2, k3)
    }

    fn rho3(&self, _k: i64, k1: i64, _inter: i64) -> f64 {
        2.0 / k1 as f64
    }

    fn res3_quadratic(&self, k: i64, k1: i64) -> Option<(f64, f64, f64)> {
        // psi3 = -(k-k1)/8 * (k1+k2)(k-k2) with k3 = k - k1 - k2
        let b = (k - k1) as f64;
        Some((-b / 8.0 * (k1 as f64) * (k as f64), -b / 8.0 * b, b / 8.0))
    }
}

fn cis(theta: f64) -> Complex64 {
    Complex64::new(0.0, theta).exp()
}

/// `dV/dt` form: `out(k) = -sign/4 * i*mu(k) * (1/sqrt(2pi)) *
/// sum_{k=k1+k2, k1 k2 != 0} e^{i sign t res2} v(k1) v(k2)`.
fn form_quadratic<S: NfSystem>(sys: &S, v: View, t: f64, sig: f64) -> Vec<Complex64> {
    let mut acc = vec![Complex64::ZERO; v.c.len()];
    for k1 in v.modes() {
        if k1 == 0 {
            continue;
        }
        let v1 = v.get(k1);
        if v1 == Complex64::ZERO {
            continue;
        }
        for k2 in v.modes() {
            if k2 == 0 {
                continue;
            }
            let k = k1 + k2;
            if !v.contains(k) {
                continue;
            }
            let phase = cis(sig * t * sys.res2(k, k1, k2));
            acc[(k - v.lo) as usize] += phase * v1 * v.get(k2);
        }
    }
    for (i, a) in acc.iter_mut().enumerate() {
        let k = v.lo + i as i64;
        *a *= Complex64::new(0.0, -0.25 * sig * sys.mu(k)) * INV_SQRT_2PI;
    }
    acc
}

/// Boundary form of the quadratic term:
/// `out(k) = (1/sqrt(2pi)) * mu(k) * sum e^{i sign t res2} f(k1) g(k2) / res2`.
fn form_quadratic_boundary<S: NfSystem>(
    sys: &S,
    f: View,
    g: View,
    t: f64,
    sig: f64,
) -> Result<Vec<Complex64>> {
    let mut acc = vec![Complex64::ZERO; f.c.len()];
    for k1 in f.modes() {
        if k1 == 0 {
            continue;
        }
        let f1 = f.get(k1);
        if f1 == Complex64::ZERO {
            continue;
        }
        for k2 in g.modes() {
            if k2 == 0 {
                continue;
            }
            let k = k1 + k2;
            if k == 0 || !f.contains(k) {
                continue;
            }
            let r2 = sys.res2(k, k1, k2);
            if r2 == 0.0 {
                return Err(Error::VanishingDenominator(format!(
                    "res2({k}; {k1}, {k2})"
                )));
            }
            acc[(k - f.lo) as usize] += cis(sig * t * r2) * f1 * g.get(k2) / r2;
        }
    }
    for (i, a) in acc.iter_mut().enumerate() {
        let k = f.lo + i as i64;
        *a *= sys.mu(k) * INV_SQRT_2PI;
    }
    Ok(acc)
}

/// Cubic boundary form over the non-resonant set
/// (`k = k1+k2+k3`, all slots and all pair sums nonzero):
/// `out(k) = (1/2pi) * sum rho3/res3 * e^{i sign t res3} f1(k1) f2(k2) f3(k3)`,
/// optionally restricted to inner pair sums `|k2+k3| <= cap`.
fn form_cubic_boundary<S: NfSystem>(
    sys: &S,
    f1: View,
    f2: View,
    f3: View,
    t: f64,
    sig: f64,
    cap: Option<i64>,
) -> Result<Vec<Complex64>> {
    let lo = f1.lo;
    let len = f1.c.len();
    let sigma2 = INV_SQRT_2PI * INV_SQRT_2PI;
    (0..len)
        .into_par_iter()
        .map(|i| {
            let k = lo + i as i64;
            if k == 0 {
                return Ok(Complex64::ZERO);
            }
            let mut total = Complex64::ZERO;
            for k1 in f1.modes() {
                if k1 == 0 || k1 == k {
                    continue;
                }
                let inter = k - k1; // = k2 + k3
                if let Some(c) = cap {
                    if inter.abs() > c {
                        continue;
                    }
                }
                let a1 = f1.get(k1);
                if a1 == Complex64::ZERO {
                    continue;
                }
                let rho = sys.rho3(k, k1, inter);
                let mut inner = Complex64::ZERO;
                if let Some((c0, c1, c2)) = sys.res3_quadratic(k, k1) {
                    // quadratic phase: advance e^{i sig t res3} by two
                    // running rotations instead of a cis per term
                    let a = sig * t;
                    let lo = f2.lo as f64;
                    let mut cur = cis(a * (c0 + c1 * lo + c2 * lo * lo));
                    let mut step = cis(a * (c1 + c2 * (2.0 * lo + 1.0)));
                    let dd = cis(a * 2.0 * c2);
                    for k2 in f2.modes() {
                        let k3 = k - k1 - k2;
                        if k2 != 0 && k1 + k2 != 0 && k3 != 0 && k1 + k3 != 0 && f3.contains(k3) {
                            let k2f = k2 as f64;
                            let r3 = c0 + c1 * k2f + c2 * k2f * k2f;
                            if r3 == 0.0 {
                                return Err(Error::VanishingDenominator(format!(
                                    "res3({k}; {k1}, {k2}, {k3})"
                                )));
                            }
                            inner += cur * f2.get(k2) * f3.get(k3) / r3;
                        }
                        cur *= step;
                        step *= dd;
                    }
                } else {
                    for k2 in f2.modes() {
                        if k2 == 0 || k1 + k2 == 0 {
                            continue;
                        }
                        let k3 = k - k1 - k2;
                        if k3 == 0 || k1 + k3 == 0 || !f3.contains(k3) {
                            continue;
                        }
                        let r3 = sys.res3(k, k1, k2, k3);
                        if r3 == 0.0 {
                            return Err(Error::VanishingDenominator(format!(
                                "res3({k}; {k1}, {k2}, {k3})"
                            )));
                        }
                        inner += cis(sig * t * r3) * f2.get(k2) * f3.get(k3) / r3;
                    }
                }
                total += rho * a1 * inner;
            }
            Ok(total * sigma2)
        })
        .collect()
}

/// Resonant cubic terms, assembled directly over the requested subset of
/// resonant triples (all phases are identically 1 there).
fn form_resonant<S: NfSystem>(
    sys: &S,
    v: View,
    sig: f64,
    cap: Option<i64>,
    subset: ResonantSubset,
) -> Vec<Complex64> {
    let sigma2 = INV_SQRT_2PI * INV_SQRT_2PI;
    let coeff = Complex64::new(0.0, sig) * sigma2;
    let mut out = vec![Complex64::ZERO; v.c.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        let k = v.lo + i as i64;
        if k == 0 {
            continue;
        }
        let vk = v.get(k);
        let mut total = Complex64::ZERO;
        if matches!(subset, ResonantSubset::Diagonal | ResonantSubset::All)
            && v.contains(-k)
            && cap.is_none_or(|c| (2 * k).abs() <= c)
        {
            // triple (k1, k2, k3) = (-k, k, k)
            total += sys.rho3(k, -k, 2 * k) * v.get(-k) * vk * vk;
        }
        if matches!(subset, ResonantSubset::OffDiagonal | ResonantSubset::All) {
            // triples (k1, -k1, k) and (k1, k, -k1) contribute equally
            let mut pair = Complex64::ZERO;
            for k1 in v.modes() {
                if k1 == 0 || k1 == k || k1 == -k || !v.contains(-k1) {
                    continue;
                }
                if let Some(c) = cap {
                    if (k - k1).abs() > c {
                        continue;
                    }
                }
                pair += sys.rho3(k, k1, k - k1) * v.get(k1) * v.get(-k1);
            }
            total += 2.0 * pair * vk;
        }
        *slot = coeff * total;
    }
    out
}

// ---------------------------------------------------------------------
// public forms on the lattice window
// ---------------------------------------------------------------------

fn spectrum_view(s: &Spectrum) -> View<'_> {
    View {
        lo: -(s.grid().n() as i64),
        c: s.coeffs(),
    }
}

fn cont_view(s: &ContinuumSpectrum) -> View<'_> {
    View {
        lo: -(s.cutoff() as i64),
        c: s.coeffs(),
    }
}

fn require_mean_zero_lattice(v: &Spectrum) -> Result<()> {
    let m = v.mean_coefficient().norm();
    if m > 1e-10 * v.linf().max(1.0) {
        return Err(Error::NonzeroMean(m));
    }
    Ok(())
}

fn require_mean_zero_cont(v: &ContinuumSpectrum) -> Result<()> {
    let m = v.coeff(0).norm();
    if m > 1e-10 * v.linf_coeff().max(1.0) {
        return Err(Error::NonzeroMean(m));
    }
    Ok(())
}

fn lattice_quartic(
    sys: &LatticeNf,
    v: &Spectrum,
    t: f64,
    sig: f64,
    cap: Option<i64>,
) -> Result<Vec<Complex64>> {
    // the derivative slot is the window-projected quadratic form itself
    let dv = Spectrum::new(v.grid(), form_quadratic(sys, spectrum_view(v), t, sig))?;
    let first = form_cubic_boundary(
        sys,
        spectrum_view(&dv),
        spectrum_view(v),
        spectrum_view(v),
        t,
        sig,
        cap,
    )?;
    let second = form_cubic_boundary(
        sys,
        spectrum_view(v),
        spectrum_view(v),
        spectrum_view(&dv),
        t,
        sig,
        cap,
    )?;
    Ok(first
        .iter()
        .zip(&second)
        .map(|(a, b)| a + 2.0 * b)
        .collect())
}

fn continuum_quartic(
    v: &ContinuumSpectrum,
    t: f64,
    sig: f64,
    cap: Option<i64>,
) -> Result<Vec<Complex64>> {
    let sys = &ContinuumNf;
    let dv = ContinuumSpectrum::new(v.cutoff(), form_quadratic(sys, cont_view(v), t, sig))?;
    let first = form_cubic_boundary(sys, cont_view(&dv), cont_view(v), cont_view(v), t, sig, cap)?;
    let second = form_cubic_boundary(sys, cont_view(v), cont_view(v), cont_view(&dv), t, sig, cap)?;
    Ok(first
        .iter()
        .zip(&second)
        .map(|(a, b)| a + 2.0 * b)
        .collect())
}

/// Evaluate one lattice normal-form term on a mean-zero profile spectrum.
pub fn fpu_form(level: FormLevel, v: &Spectrum, t: f64, sign: Sign) -> Result<Spectrum> {
    fpu_form_capped(level, v, t, sign, None)
}

pub(crate) fn fpu_form_capped(
    level: FormLevel,
    v: &Spectrum,
    t: f64,
    sign: Sign,
    cap: Option<i64>,
) -> Result<Spectrum> {
    require_mean_zero_lattice(v)?;
    let grid = v.grid();
    let sys = LatticeNf::new(grid.h(), grid.n());
    let sig = sign.value();
    let view = spectrum_view(v);
    let coeffs = match level {
        FormLevel::Quadratic => form_quadratic(&sys, view, t, sig),
        FormLevel::QuadraticBoundary => form_quadratic_boundary(&sys, view, view, t, sig)?,
        FormLevel::CubicBoundary => form_cubic_boundary(&sys, view, view, view, t, sig, cap)?,
        FormLevel::Quartic => lattice_quartic(&sys, v, t, sig, cap)?,
        FormLevel::ResonantStrong => {
            let sigma2 = INV_SQRT_2PI * INV_SQRT_2PI;
            let h = grid.h();
            grid.modes()
                .map(|k| {
                    if k == 0 || !grid.contains_mode(-k) {
                        return Complex64::ZERO;
                    }
                    let kf = k as f64;
                    let gain = 2.0 * (0.5 * h * kf).cos() * (0.25 * h * kf).cos()
                        / (4.0 / h * (0.25 * h * kf).sin());
                    let vk = v.coeff(k);
                    Complex64::new(0.0, -sig) * sigma2 * gain * vk.norm_sqr() * vk
                })
                .collect()
        }
        FormLevel::ResonantWeak => {
            let sigma2 = INV_SQRT_2PI * INV_SQRT_2PI;
            let h = grid.h();
            let mass_except = |k: i64| -> f64 {
                grid.modes()
                    .filter(|&k1| k1 != 0 && k1 != k && k1 != -k)
                    .map(|k1| v.coeff(k1).norm_sqr())
                    .sum()
            };
            grid.modes()
                .map(|k| {
                    if k == 0 {
                        return Complex64::ZERO;
                    }
                    Complex64::new(0.0, sig)
                        * sigma2
                        * 0.5
                        * h
                        * (0.5 * h * k as f64).sin()
                        * v.coeff(k)
                        * mass_except(k)
                })
                .collect()
        }
    };
    Spectrum::new(grid, coeffs)
}

/// Resonant cubic terms on the lattice, assembled triple by triple.
pub fn fpu_resonant_direct(v: &Spectrum, sign: Sign, subset: ResonantSubset) -> Result<Spectrum> {
    require_mean_zero_lattice(v)?;
    let grid = v.grid();
    let sys = LatticeNf::new(grid.h(), grid.n());
    Spectrum::new(
        grid,
        form_resonant(&sys, spectrum_view(v), sign.value(), None, subset),
    )
}

/// Evaluate one continuum normal-form term on a mean-zero spectrum.
pub fn kdv_form(
    level: FormLevel,
    w: &ContinuumSpectrum,
    t: f64,
    sign: Sign,
) -> Result<ContinuumSpectrum> {
    kdv_form_capped(level, w, t, sign, None)
}

pub(crate) fn kdv_form_capped(
    level: FormLevel,
    w: &ContinuumSpectrum,
    t: f64,
    sign: Sign,
    cap: Option<i64>,
) -> Result<ContinuumSpectrum> {
    require_mean_zero_cont(w)?;
    let sys = &ContinuumNf;
    let sig = sign.value();
    let view = cont_view(w);
    let coeffs = match level {
        FormLevel::Quadratic => form_quadratic(sys, view, t, sig),
        FormLevel::QuadraticBoundary => form_quadratic_boundary(sys, view, view, t, sig)?,
        FormLevel::CubicBoundary => form_cubic_boundary(sys, view, view, view, t, sig, cap)?,
        FormLevel::Quartic => continuum_quartic(w, t, sig, cap)?,
        FormLevel::ResonantStrong => {
            let sigma2 = INV_SQRT_2PI * INV_SQRT_2PI;
            w.modes()
                .map(|k| {
                    if k == 0 {
                        return Complex64::ZERO;
                    }
                    let wk = w.coeff(k);
                    Complex64::new(0.0, -sig) * sigma2 * 2.0 / k as f64 * wk.norm_sqr() * wk
                })
                .collect()
        }
        // the odd 1/k1 summand cancels pairwise for the KdV system
        FormLevel::ResonantWeak => vec![Complex64::ZERO; w.coeffs().len()],
    };
    ContinuumSpectrum::new(w.cutoff(), coeffs)
}

/// Resonant cubic terms for KdV, assembled triple by triple.
pub fn kdv_resonant_direct(
    w: &ContinuumSpectrum,
    sign: Sign,
    subset: ResonantSubset,
) -> Result<ContinuumSpectrum> {
    require_mean_zero_cont(w)?;
    ContinuumSpectrum::new(
        w.cutoff(),
        form_resonant(&ContinuumNf, cont_view(w), sign.value(), None, subset),
    )
}

// ---------------------------------------------------------------------
// residual of the regularized integral identities
// ---------------------------------------------------------------------

/// The regularized identity shared by both systems,
/// with `D(t) = B2(t) - B2(0)`, `C(t) = B3(t) - B3(0)`:
///
/// `V(t) = V(0) - D(t)/4 + (1/2) int_0^t RES + C(t)/2 - (1/2) int_0^t B4`,
///
/// where every multilinear term keeps the solver's truncation of the inner
/// pair frequency. The residual is the sup over evaluation times of the
/// `l^2` norm of LHS - RHS.
struct ResidualPlan {
    stride: usize,
    segments: usize, // number of Simpson double-intervals
}

fn residual_plan(len: usize) -> Result<ResidualPlan> {
    if len < 8 {
        return Err(Error::InvalidParameter(format!(
            "trajectory too coarse for quadrature: {len} samples < 8"
        )));
    }
    let intervals = len - 1;
    // aim for ~64 quadrature intervals; prefer a stride tiling them evenly,
    // otherwise drop the trailing fraction of a double-interval
    let start = (intervals / 64).max(1);
    let stride = (start..=4 * start)
        .find(|s| intervals.is_multiple_of(2 * s))
        .unwrap_or(1);
    Ok(ResidualPlan {
        stride,
        segments: intervals / (2 * stride),
    })
}

fn sup_residual<G>(
    plan: &ResidualPlan,
    dt: f64,
    n_coeffs: usize,
    lambda: f64,
    state: G,
) -> Result<f64>
where
    G: Fn(usize) -> Result<ResidualNode>,
{
    // nodes are trajectory indices stride, 2*stride, ...
    let delta = plan.stride as f64 * dt;
    let nodes = 2 * plan.segments;
    let mut acc_res = vec![Complex64::ZERO; n_coeffs];
    let mut acc_b4 = vec![Complex64::ZERO; n_coeffs];
    let base = state(0)?;
    let mut worst: f64 = 0.0;
    let mut prev = base.clone();
    let mut mid: Option<ResidualNode> = None;
    for m in 1..=nodes {
        let node = state(m)?;
        if m % 2 == 1 {
            mid = Some(node);
            continue;
        }
        let midn = mid.take().expect("odd node stored");
        for i in 0..n_coeffs {
            acc_res[i] +=
                delta / 3.0 * (prev.resonant[i] + 4.0 * midn.resonant[i] + node.resonant[i]);
            acc_b4[i] += delta / 3.0 * (prev.quartic[i] + 4.0 * midn.quartic[i] + node.quartic[i]);
        }
        worst = worst.max(defect(&node, &base, &acc_res, &acc_b4, lambda));
        prev = node;
    }
    return Ok(worst);

    fn defect(
        node: &ResidualNode,
        base: &ResidualNode,
        acc_res: &[Complex64],
        acc_b4: &[Complex64],
        lambda: f64,
    ) -> f64 {
        let l2 = lambda * lambda;
        let l3 = l2 * lambda;
        let mut sum = 0.0;
        for i in 0..node.value.len() {
            let r = node.value[i] - base.value[i]
                + 0.25 * lambda * (node.boundary2[i] - base.boundary2[i])
                - 0.5 * l2 * acc_res[i]
                - 0.5 * l2 * (node.boundary3[i] - base.boundary3[i])
                + 0.5 * l3 * acc_b4[i];
            sum += r.norm_sqr();
        }
        sum.sqrt()
    }
}

#[derive(Clone)]
struct ResidualNode {
    value: Vec<Complex64>,
    boundary2: Vec<Complex64>,
    boundary3: Vec<Complex64>,
    resonant: Vec<Complex64>,
    quartic: Vec<Complex64>,
}

/// Residual of the regularized lattice identity along a decoupled
/// trajectory; errors on coupled input or trajectories too short for
/// Simpson quadrature.
pub fn residual_regularized_fpu(traj: &Trajectory<ProfilePair>) -> Result<f64> {
    if traj.states.iter().any(|s| s.kind != SystemKind::Decoupled) {
        return Err(Error::InvalidParameter(
            "regularized identity applies to the decoupled system".into(),
        ));
    }
    let plan = residual_plan(traj.states.len())?;
    let lambda = if traj.options.nonlinearity { 1.0 } else { 0.0 };
    let grid = traj.states[0].grid();
    let sys = LatticeNf::new(grid.h(), grid.n());
    let cap = Some(grid.n() as i64 - 1);
    let mut worst: f64 = 0.0;
    for sign in Sign::BOTH {
        let node = |m: usize| -> Result<ResidualNode> {
            let idx = m * plan.stride;
            let state = &traj.states[idx];
            let v = state.spectrum(sign);
            let t = traj.time_at(idx);
            let view = spectrum_view(v);
            let value = v.coeffs().to_vec();
            if lambda == 0.0 {
                let zero = vec![Complex64::ZERO; value.len()];
                return Ok(ResidualNode {
                    value,
                    boundary2: zero.clone(),
                    boundary3: zero.clone(),
                    resonant: zero.clone(),
                    quartic: zero,
                });
            }
            // the solver projects the unpaired Nyquist slot, so the identity
            // holds on the projected subspace; keep the forms there too
            let project = |mut v: Vec<Complex64>| {
                v[0] = Complex64::ZERO;
                v
            };
            let boundary2 = project(form_quadratic_boundary(&sys, view, view, t, sign.value())?);
            let boundary3 = project(form_cubic_boundary(
                &sys,
                view,
                view,
                view,
                t,
                sign.value(),
                cap,
            )?);
            let resonant = project(form_resonant(
                &sys,
                view,
                sign.value(),
                cap,
                ResonantSubset::All,
            ));
            let quartic = project(lattice_quartic(&sys, v, t, sign.value(), cap)?);
            Ok(ResidualNode {
                value,
                boundary2,
                boundary3,
                resonant,
                quartic,
            })
        };
        let r = sup_residual(&plan, traj.dt, grid.points(), lambda, node)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Residual of the regularized KdV identity along a solver trajectory.
pub fn residual_regularized_kdv(traj: &Trajectory<KdvState>) -> Result<f64> {
    let plan = residual_plan(traj.states.len())?;
    let lambda = if traj.options.nonlinearity { 1.0 } else { 0.0 };
    let cutoff = traj.states[0].cutoff();
    let cap = Some(cutoff as i64);
    let sys = &ContinuumNf;
    let mut worst: f64 = 0.0;
    for sign in Sign::BOTH {
        let node = |m: usize| -> Result<ResidualNode> {
            let idx = m * plan.stride;
            let state = &traj.states[idx];
            let w = state.spectrum(sign);
            let t = traj.time_at(idx);
            let view = cont_view(w);
            let value = w.coeffs().to_vec();
            if lambda == 0.0 {
                let zero = vec![Complex64::ZERO; value.len()];
                return Ok(ResidualNode {
                    value,
                    boundary2: zero.clone(),
                    boundary3: zero.clone(),
                    resonant: zero.clone(),
                    quartic: zero,
                });
            }
            let boundary2 = form_quadratic_boundary(sys, view, view, t, sign.value())?;
            let boundary3 = form_cubic_boundary(sys, view, view, view, t, sign.value(), cap)?;
            let resonant = form_resonant(sys, view, sign.value(), cap, ResonantSubset::All);
            let quartic = continuum_quartic(w, t, sign.value(), cap)?;
            Ok(ResidualNode {
                value,
                boundary2,
                boundary3,
                resonant,
                quartic,
            })
        };
        let r = sup_residual(&plan, traj.dt, 2 * cutoff + 1, lambda, node)?;
        worst = worst.max(r);
    }
    Ok(worst)
}
