//! Overlap bound for invariant algorithms: the harmonic sum, its closed-form
//! approximation, and the fewest queries that can reach a given success
//! probability.

use invinsert::bounds::{bound_report, harmonic_sum};

fn main() -> invinsert::Result<()> {
    println!(
        "{:>8} {:>12} {:>12} {:>10}",
        "N", "sum", "approx", "rel err"
    );
    for n in [3, 4, 5, 8, 64, 1024, 4096] {
        let h = harmonic_sum(n)?;
        println!(
            "{n:>8} {:>12.8} {:>12.8} {:>10.2e}",
            h.exact,
            h.approx,
            h.relative_error()
        );
    }
    println!();
    println!(
        "{:>8} {:>6} {:>10} {:>10}",
        "N", "k_min", "ln form", "ratio"
    );
    for m in (10..=20).step_by(2) {
        let n = 1usize << m;
        let r = bound_report(n, 1.0)?;
        let asym = r.asymptotic.expect("n >= 16");
        println!(
            "{n:>8} {:>6} {:>10.4} {:>10.4}",
            r.min_queries,
            asym.natural,
            r.min_queries as f64 / asym.natural
        );
    }
    Ok(())
}
