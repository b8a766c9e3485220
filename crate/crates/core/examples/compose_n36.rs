//! Uses the exact (6, 2) algorithm twice to place an item among 36 with
//! four queries, against six for classical binary search.

use std::collections::BTreeMap;

use invinsert::compose::{compose_solve, rate};
use invinsert::synth::synthesize_exact;

fn main() -> invinsert::Result<()> {
    let (m, k, h) = (6, 2, 2);
    let schedule = synthesize_exact(m, k, &BTreeMap::new())?.schedule;
    let mut worst = 0;
    for j in 0..36 {
        let run = compose_solve(m, k, h, &schedule, j)?;
        assert_eq!(run.found_j, j);
        worst = worst.max(run.queries_used);
        let path: Vec<String> = run
            .per_level
            .iter()
            .map(|l| format!("{}@{}", l.answer, l.base))
            .collect();
        println!(
            "j = {j:>2} found {:>2} with {} queries via {}",
            run.found_j,
            run.queries_used,
            path.join(" -> ")
        );
    }
    println!(
        "worst case {worst} queries, classical {}",
        (36f64).log2().ceil()
    );
    println!(
        "rate(2, 6) = {:.4}, rate(3, 52) = {:.4}",
        rate(2, 6)?,
        rate(3, 52)?
    );
    Ok(())
}
