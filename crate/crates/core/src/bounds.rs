//! Overlap bound and query lower bound for invariant algorithms.
//!
//! Since `<p|F_0|q>` depends only on `p - q mod 2N`, the overlap of any
//! invariant `l`-query state with its target is at most
//! `S^l / sqrt(N)` with `S = (1/N) sum_{p odd} 1/sin(pi p / 2N)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::check_size;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmonicSum {
    pub exact: f64,
    pub approx: f64,
}

impl HarmonicSum {
    pub fn relative_error(&self) -> f64 {
        (self.exact - self.approx).abs() / self.exact
    }
}

/// `S = (1/N) sum_{p odd < 2N} 1/sin(pi p / 2N)` and its closed-form
/// approximation `(2/pi)(ln N + gamma + ln(8/pi))`.
pub fn harmonic_sum(n: usize) -> Result<HarmonicSum> {
    check_size(n)?;
    let dim = (2 * n) as f64;
    // the summand is symmetric under p -> 2N - p; add the half below N twice
    let mut exact = 0.0;
    for p in (1..n).step_by(2) {
        exact += 2.0 / (PI * p as f64 / dim).sin();
    }
    if n % 2 == 1 {
        exact += 1.0;
    }
    exact /= n as f64;
    let approx = 2.0 / PI * ((n as f64).ln() + crate::EULER_GAMMA + (8.0 / PI).ln());
    Ok(HarmonicSum { exact, approx })
}

/// `S^ell / sqrt(N)`.
pub fn overlap_bound(n: usize, ell: usize) -> Result<f64> {
    let s = harmonic_sum(n)?.exact;
    Ok(s.powi(ell as i32) / (n as f64).sqrt())
}

/// Asymptotic query bounds, reported only where `ln ln N` is comfortably
/// positive (`N >= 16`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Asymptotic {
    /// `ln N / (2 ln ln N)`.
    pub natural: f64,
    /// `log2 N / (2 log2 log2 N)`, the general bound quoted for reference.
    pub base2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub epsilon: f64,
    pub harmonic: HarmonicSum,
    /// `overlap_bound(n, l)` for `l = 0 ..= k_min`.
    pub per_ell: Vec<f64>,
    pub min_queries: usize,
    pub asymptotic: Option<Asymptotic>,
}

pub fn asymptotic_queries(n: usize) -> Option<Asymptotic> {
    if n < 16 {
        return None;
    }
    let nf = n as f64;
    Some(Asymptotic {
        natural: nf.ln() / (2.0 * nf.ln().ln()),
        base2: nf.log2() / (2.0 * nf.log2().log2()),
    })
}

/// Smallest `k` whose squared overlap bound reaches `epsilon`.
pub fn min_queries_invariant(n: usize, epsilon: f64) -> Result<(usize, Option<Asymptotic>)> {
    let r = bound_report(n, epsilon)?;
    Ok((r.min_queries, r.asymptotic))
}

pub fn bound_report(n: usize, epsilon: f64) -> Result<BoundReport> {
    check_size(n)?;
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, 1]")));
    }
    let harmonic = harmonic_sum(n)?;
    let base = 1.0 / (n as f64).sqrt();
    let mut per_ell = vec![base];
    // S > 1 for every n >= 2, so the loop terminates
    while per_ell.last().unwrap().powi(2) < epsilon {
        let next = per_ell.last().unwrap() * harmonic.exact;
        per_ell.push(next);
    }
    Ok(BoundReport {
        n,
        epsilon,
        harmonic,
        min_queries: per_ell.len() - 1,
        per_ell,
        asymptotic: asymptotic_queries(n),
    })
}
