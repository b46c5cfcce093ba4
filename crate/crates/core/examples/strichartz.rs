//! Empirical space-time L4 Strichartz probe for the free lattice flow: the
//! max quotient `|S_h(t) f|_{L^4([0,T] x T_h)} / |f|_{L^2}` over random unit
//! data must stay bounded as the mesh refines.
//!
//! ```bash
//! cargo run --release --example strichartz
//! ```

use fpu_kdv::harness::strichartz_probe;

fn main() -> fpu_kdv::Result<()> {
    let stats = strichartz_probe(&[16, 32, 64, 128, 256], 50, 0.5, 0)?;
    println!("{:>6} {:>12} {:>12}", "N", "max ratio", "mean ratio");
    for row in &stats.rows {
        println!(
            "{:>6} {:>12.6} {:>12.6}",
            row.n, row.max_ratio, row.mean_ratio
        );
    }
    let first = stats.rows.first().unwrap().max_ratio;
    let last = stats.rows.last().unwrap().max_ratio;
    println!(
        "finest/coarsest max-ratio quotient: {:.3} (uniform boundedness wants <= 2)",
        last / first
    );
    Ok(())
}
