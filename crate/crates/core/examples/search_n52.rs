//! Finds a free series for a three-query exact algorithm at N = 52, then
//! synthesizes and verifies the schedule.
//!
//! Run with `cargo run --release --example search_n52`.

use std::time::Instant;

use invinsert::compose::rate;
use invinsert::exact::{search_free_series, SearchParams};
use invinsert::synth::synthesize_exact;

fn main() -> invinsert::Result<()> {
    let (n, k) = (52, 3);
    let start = Instant::now();
    let Some(found) = search_free_series(n, k, &SearchParams::default())? else {
        println!("no feasible free series at n = {n}");
        return Ok(());
    };
    println!(
        "search: delta = {:.5}, grid = {}, {:.1?}",
        found.delta,
        found.grid_points,
        start.elapsed()
    );
    for (ell, c) in &found.certificates {
        println!(
            "  stage {ell}: min {:.5} margin {:.5} {:?}",
            c.grid_min, c.margin, c.verdict
        );
    }
    let s = synthesize_exact(n, k, &found.free)?;
    println!("synthesis: min success {:.12}", s.report.min_success);
    println!(
        "max factor residual {:.2e}",
        s.stages
            .iter()
            .map(|d| d.factor_residual)
            .fold(0.0, f64::max)
    );
    println!("rate {:.4} queries per log2 N", rate(k, n)?);
    Ok(())
}
