//! Builds the exact two-query algorithm for N = 6 and prints the first
//! column of each inter-query unitary.

use std::collections::BTreeMap;

use invinsert::synth::synthesize_exact;

fn main() -> invinsert::Result<()> {
    let s = synthesize_exact(6, 2, &BTreeMap::new())?;
    println!("success probabilities:");
    for (j, p) in s.report.success_probs.iter().enumerate() {
        println!("  j = {j}: {p:.15}");
    }
    println!(
        "max |<final_i|final_j>| = {:.2e}",
        s.report.max_cross_overlap
    );
    println!("\n{:>3} {:>8} {:>8}", "x", "V1", "V2");
    for x in 0..12 {
        println!(
            "{x:>3} {:>8.4} {:>8.4}",
            s.report.v_columns[0][x].re, s.report.v_columns[1][x].re
        );
    }
    println!("largest imaginary part {:.2e}", s.report.max_v_imag);
    println!("\nschedule JSON:\n{}", s.schedule.to_json()?);
    Ok(())
}
