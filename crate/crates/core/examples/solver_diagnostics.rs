//! Cross-validate the solvers: the integrating-factor profile solver against
//! direct second-order wave integration, Hamiltonian conservation, and
//! Richardson self-convergence of the stepper.
//!
//! ```bash
//! cargo run --release --example solver_diagnostics
//! ```

use fpu_kdv::fpu::{
    hamiltonian, reconstruct_r, solve, solve_wave_direct, split_initial, ProfilePair, SolveOptions,
    SystemKind, Trajectory, WaveState,
};
use fpu_kdv::spectral::{forward_dft, Field};
use fpu_kdv::{LatticeGrid, Sign};

fn main() -> fpu_kdv::Result<()> {
    let grid = LatticeGrid::new(16)?;
    let data = WaveState {
        r: Field::from_fn(grid, f64::sin),
        r_t: Field::zeros(grid),
    };
    let opts = SolveOptions::default();

    // dual-path oracle: the two integration routes must agree to ~1e-8
    let dt = 2e-4;
    let pair = split_initial(&data, SystemKind::Coupled)?;
    let profile = solve(&pair, 0.2, dt, &opts)?;
    let direct = solve_wave_direct(&data, 0.2, dt, &opts)?;
    let a = forward_dft(&reconstruct_r(profile.last())?.r);
    let b = forward_dft(&direct.last().r);
    let dist = a
        .coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    println!("profile vs direct wave, L2 distance at T = 0.2: {dist:.3e}");

    // Hamiltonian drift along the profile solve
    let traj = solve(&pair, 0.5, 1e-3, &opts)?;
    let h0 = hamiltonian(&reconstruct_r(&traj.states[0])?)?;
    let mut drift: f64 = 0.0;
    for idx in traj.sample_indices(16) {
        let e = hamiltonian(&reconstruct_r(&traj.states[idx])?)?;
        drift = drift.max(((e - h0) / h0).abs());
    }
    println!("relative Hamiltonian drift over T = 0.5:        {drift:.3e}");

    // Richardson self-convergence of the profile stepper
    let strong = WaveState {
        r: Field::from_fn(grid, |x| 4.0 * x.sin()),
        r_t: Field::zeros(grid),
    };
    let p0 = split_initial(&strong, SystemKind::Decoupled)?;
    let reference = solve(&p0, 0.2, 1e-3, &opts)?;
    let err = |traj: &Trajectory<ProfilePair>| {
        traj.last().l2_distance(reference.last(), Sign::Plus)
            + traj.last().l2_distance(reference.last(), Sign::Minus)
    };
    let coarse = err(&solve(&p0, 0.2, 8e-3, &opts)?);
    let half = err(&solve(&p0, 0.2, 4e-3, &opts)?);
    println!(
        "self-convergence order (halving dt):            {:.2}",
        (coarse / half).log2()
    );
    Ok(())
}
