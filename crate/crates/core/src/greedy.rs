//! The greedy invariant algorithm.
//!
//! At stage `l` every momentum amplitude of `F_0 |psi_{l-1}>` is rotated onto
//! the nonnegative real axis, which maximizes the overlap with `|0 +->`
//! given the previous stages. Because `<p|F_0|q> = (1 - i cot(pi (p - q) / 2N)) / N`
//! for odd `p - q`, one stage costs `O(N^2)` with a cotangent table.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{check_size, reduce_phase, Basis, PhaseSchedule, StateVector, STATE_TOL};

/// Below this modulus a propagated amplitude is treated as zero and its
/// phase is set to 0.
pub const ZERO_AMPLITUDE: f64 = 1e-14;

#[derive(Clone, Debug, Serialize)]
pub struct GreedyTrace {
    pub n: usize,
    /// `probs[l]` is the success probability after `l` queries; `probs[0] = 1/N`.
    pub probs: Vec<f64>,
    /// Momentum-basis states `psi_0 ..= psi_k`.
    #[serde(skip)]
    pub states: Vec<StateVector>,
    pub schedule: PhaseSchedule,
}

/// `cot(pi d / 2N)` for `d = 0..2N`; entries at even `d` are never read.
fn cot_table(n: usize) -> Vec<f64> {
    let dim = 2 * n;
    (0..dim)
        .map(|d| {
            if d % 2 == 1 {
                let u = PI * d as f64 / dim as f64;
                u.cos() / u.sin()
            } else {
                0.0
            }
        })
        .collect()
}

/// `<p|F_0|psi>` at every momentum of parity `live`, using the cotangent form.
fn propagate(amps: &[Complex64], n: usize, live: usize, cot: &[f64]) -> Vec<Complex64> {
    let dim = 2 * n;
    let prev = 1 - live;
    let total: Complex64 = (prev..dim).step_by(2).map(|q| amps[q]).sum();
    let inv_n = 1.0 / n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for p in (live..dim).step_by(2) {
        let mut c = Complex64::new(0.0, 0.0);
        for q in (prev..dim).step_by(2) {
            c += amps[q] * cot[(p + dim - q) % dim];
        }
        // sum_q (1 - i cot) psi_q / N
        out[p] = (total - Complex64::i() * c) * inv_n;
    }
    out
}

fn support_check(psi: &StateVector, parity: usize) -> Result<()> {
    let leak = psi
        .amps()
        .iter()
        .enumerate()
        .filter(|(p, _)| p % 2 != parity)
        .map(|(_, a)| a.norm())
        .fold(0.0, f64::max);
    if leak > STATE_TOL {
        return Err(Error::Contract(format!(
            "state has momentum amplitude {leak:.3e} outside parity {parity}"
        )));
    }
    Ok(())
}

/// One greedy stage: returns `psi_l` (momentum basis, real and nonnegative)
/// and the phases `alpha_l(p)` that produced it.
pub fn greedy_step(psi_prev: &StateVector, ell: usize) -> Result<(StateVector, Vec<f64>)> {
    if ell == 0 {
        return Err(Error::Contract("greedy stages start at l = 1".into()));
    }
    if psi_prev.basis() != Basis::Momentum {
        return Err(Error::Contract(
            "greedy_step expects a momentum-basis state".into(),
        ));
    }
    let n = psi_prev.n();
    support_check(psi_prev, (ell - 1) % 2)?;
    let cot = cot_table(n);
    Ok(step_with_table(psi_prev, ell, &cot))
}

fn step_with_table(psi_prev: &StateVector, ell: usize, cot: &[f64]) -> (StateVector, Vec<f64>) {
    let n = psi_prev.n();
    let live = ell % 2;
    let phi = propagate(psi_prev.amps(), n, live, cot);
    let mut phases = vec![0.0; 2 * n];
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * n];
    for p in (live..2 * n).step_by(2) {
        let r = phi[p].norm();
        amps[p] = Complex64::new(r, 0.0);
        if r > ZERO_AMPLITUDE {
            phases[p] = reduce_phase(-phi[p].arg());
        }
    }
    let psi = StateVector::new(n, Basis::Momentum, amps).expect("dimension preserved");
    (psi, phases)
}

/// Runs `k` greedy stages from `|p = 0>`.
///
/// Probabilities follow the recursion
/// `Prob(l) = [ (1/N) sum_p sqrt(Prob(l-1) + c_p^2 / N) ]^2` with
/// `c_p = sum_q cot(pi (p - q) / 2N) <q|psi_{l-1}>`.
pub fn greedy_run(n: usize, k: usize) -> Result<GreedyTrace> {
    check_size(n)?;
    if k == 0 {
        return Err(Error::Domain("greedy_run needs k >= 1".into()));
    }
    let cot = cot_table(n);
    let nf = n as f64;
    let mut psi = StateVector::basis_vector(n, Basis::Momentum, 0)?;
    let mut probs = vec![1.0 / nf];
    let mut states = vec![psi.clone()];
    let mut stages = Vec::with_capacity(k);
    for ell in 1..=k {
        let live = ell % 2;
        let prev_prob = *probs.last().unwrap();
        let phi = propagate(psi.amps(), n, live, &cot);
        // psi_{l-1} is real and nonnegative, so Im <p|F_0|psi> = -c_p / N
        let sum: f64 = (live..2 * n)
            .step_by(2)
            .map(|p| {
                let c = -nf * phi[p].im;
                (prev_prob + c * c / nf).sqrt()
            })
            .sum();
        let prob = (sum / nf).powi(2);
        let (next, phases) = step_with_table(&psi, ell, &cot);
        probs.push(prob);
        stages.push(phases);
        states.push(next.clone());
        psi = next;
    }
    Ok(GreedyTrace {
        n,
        probs,
        states,
        schedule: PhaseSchedule::new(n, stages)?,
    })
}

/// One-query greedy success probability `[ N^{-3/2} sum_{p odd} 1/sin(pi p / 2N) ]^2`.
pub fn one_query_prob(n: usize) -> Result<f64> {
    check_size(n)?;
    let s = crate::bounds::harmonic_sum(n)?.exact;
    // (1/N^{3/2}) sum = S / sqrt(N)
    Ok(s * s / n as f64)
}

/// Large-`N` form `4 / (pi^2 N) [ln N + gamma + ln(8/pi)]^2`.
pub fn one_query_asymptotic(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidSize(n));
    }
    let nf = n as f64;
    let bracket = nf.ln() + crate::EULER_GAMMA + (8.0 / PI).ln();
    Ok(4.0 / (PI * PI * nf) * bracket * bracket)
}

/// Overlap of a greedy momentum state with `|0 +->` at stage `ell`.
pub fn target_overlap(psi: &StateVector, ell: usize) -> Complex64 {
    let n = psi.n();
    let m = psi.in_basis(Basis::Momentum);
    let s: Complex64 = (ell % 2..2 * n).step_by(2).map(|p| m.amps()[p]).sum();
    s / (n as f64).sqrt()
}
