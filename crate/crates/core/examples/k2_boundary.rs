//! Two-query exact algorithms exist only up to N = 6: the cosine series
//! `1 + B_0` goes negative from N = 7 on.

use invinsert::exact::k2_feasible;

fn main() -> invinsert::Result<()> {
    for n in 2..=16 {
        let (ok, cert) = k2_feasible(n)?;
        println!(
            "N = {n:>2}  feasible = {ok:<5}  min = {:>9.5} at theta = {:.4}  ({:?})",
            cert.grid_min, cert.argmin, cert.verdict
        );
    }
    Ok(())
}
