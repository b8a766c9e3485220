//! Greedy success probabilities for one to six queries over a range of list
//! sizes, next to the classical optimum `2^k / N`.

use invinsert::greedy::greedy_run;

fn main() -> invinsert::Result<()> {
    let k = 6;
    print!("{:>6}", "N");
    for ell in 1..=k {
        print!("{:>9}", format!("k={ell}"));
    }
    println!();
    for n in [64, 128, 256, 512, 1024, 2048, 4096] {
        let trace = greedy_run(n, k)?;
        print!("{n:>6}");
        for ell in 1..=k {
            print!("{:>9.4}", trace.probs[ell]);
        }
        println!();
        print!("{:>6}", "2^k/N");
        for ell in 1..=k {
            print!("{:>9.4}", (2f64.powi(ell as i32) / n as f64).min(1.0));
        }
        println!();
    }
    Ok(())
}
