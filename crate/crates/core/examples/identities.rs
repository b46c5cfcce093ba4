//! Run the exhaustive algebra suites: transform identities, multiplier
//! calculus, resonance symmetries/partitions, collapse of the off-diagonal
//! resonance, Taylor bounds, and the cosine inequalities.
//!
//! ```bash
//! cargo run --example identities
//! ```

use fpu_kdv::identities::{
    identity_suite, quadratic_resonance_lower_bound, sobolev_embedding_probe, taylor_suite,
};

fn main() {
    let mut all_green = true;
    for outcome in identity_suite().into_iter().chain(taylor_suite()) {
        println!("{}", outcome.line());
        all_green &= outcome.passed;
    }
    let wide = quadratic_resonance_lower_bound(32);
    println!("{}", wide.line());
    all_green &= wide.passed;

    println!("\nSobolev embedding probe (recorded, should stay flat in N):");
    for s in [0.25, 0.5] {
        let rows = sobolev_embedding_probe(s, &[4, 16, 64, 256], 100);
        let cells: Vec<String> = rows.iter().map(|(n, r)| format!("N={n}: {r:.3}")).collect();
        println!("  s = {s}: {}", cells.join(", "));
    }
    std::process::exit(if all_green { 0 } else { 1 });
}
