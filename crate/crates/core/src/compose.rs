//! Solving `N = M^h` by iterating an exact `(M, k)` schedule.
//!
//! Each level picks out `M - 1` equally spaced items of the current
//! interval, runs the subroutine on the reduced insertion problem, and
//! narrows the interval by a factor of `M`. The whole procedure uses `h k`
//! queries. It is classical control around quantum subroutines and is not
//! itself translationally invariant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{target_state, to_position, uniform_start, Oracle, PhaseSchedule, Sign};

/// Measurement must single out one answer with at least this probability.
pub const SELECT_PROB: f64 = 1.0 - 1e-8;
/// Below this the subroutine is not exact and composition is refused.
pub const EXACT_PROB: f64 = 1.0 - 1e-6;

/// Oracle for `f'(s) = f_j(base + (s+1) scale - 1)`, `s < m`.
///
/// Item `s` of the reduced list is the last element of the `s`-th block of
/// length `scale`, so `f'(s) = -1` exactly when `s < (j - base) / scale`.
pub fn reduced_oracle(j: usize, base: usize, scale: usize, m: usize) -> Result<Oracle> {
    if m < 2 || scale == 0 {
        return Err(Error::Contract(format!(
            "reduced oracle needs m >= 2 and scale >= 1 (m = {m}, scale = {scale})"
        )));
    }
    if j < base || j >= base + m * scale {
        return Err(Error::Contract(format!(
            "hidden index {j} outside [{base}, {})",
            base + m * scale
        )));
    }
    Ok(Oracle::from_fn(m, |s| {
        crate::hilbert::insertion_fn(j, base + (s + 1) * scale - 1)
    }))
}

/// One subroutine call.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelTrace {
    pub base: usize,
    pub level: u32,
    pub answer: usize,
    /// Probability of the selected answer.
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionRun {
    pub m: usize,
    pub k: usize,
    pub h: u32,
    pub n: usize,
    pub hidden_j: usize,
    pub found_j: usize,
    pub queries_used: usize,
    pub per_level: Vec<LevelTrace>,
}

/// Runs the subroutine once, counting each oracle application.
fn run_counted(schedule: &PhaseSchedule, oracle: &Oracle, queries: &mut usize) -> Result<Vec<f64>> {
    let m = schedule.n;
    let mut psi = uniform_start(m)?;
    for stage in 1..=schedule.k {
        psi = oracle.apply(&psi);
        *queries += 1;
        psi = schedule.apply_stage(stage, &psi);
    }
    let fin = to_position(&psi);
    let sign = Sign::for_queries(schedule.k);
    (0..m)
        .map(|a| Ok(target_state(a, sign, m)?.inner(&fin).norm_sqr()))
        .collect()
}

/// `m^h`, or a composition error on overflow.
pub fn composed_size(m: usize, h: u32) -> Result<usize> {
    m.checked_pow(h)
        .ok_or_else(|| Error::Composition(format!("{m}^{h} overflows")))
}

pub fn compose_solve(
    m: usize,
    k: usize,
    h: u32,
    schedule: &PhaseSchedule,
    hidden_j: usize,
) -> Result<CompositionRun> {
    schedule.validate()?;
    if schedule.n != m || schedule.k != k {
        return Err(Error::Composition(format!(
            "schedule is for (n = {}, k = {}), expected ({m}, {k})",
            schedule.n, schedule.k
        )));
    }
    if h == 0 {
        return Err(Error::Composition("h must be at least 1".into()));
    }
    let n = composed_size(m, h)?;
    if hidden_j >= n {
        return Err(Error::Contract(format!("hidden index {hidden_j} >= {n}")));
    }
    let mut base = 0;
    let mut queries = 0;
    let mut per_level = Vec::with_capacity(h as usize);
    for level in (1..=h).rev() {
        let scale = m.pow(level - 1);
        let oracle = reduced_oracle(hidden_j, base, scale, m)?;
        let probs = run_counted(schedule, &oracle, &mut queries)?;
        let (answer, prob) = probs
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("m >= 2");
        if prob < EXACT_PROB {
            return Err(Error::Composition(format!(
                "subroutine success {prob:.3e} at level {level} is not exact"
            )));
        }
        if prob < SELECT_PROB {
            return Err(Error::Composition(format!(
                "no answer reaches probability {SELECT_PROB} at level {level} (best {prob:.12})"
            )));
        }
        per_level.push(LevelTrace {
            base,
            level,
            answer,
            prob,
        });
        base += answer * scale;
    }
    Ok(CompositionRun {
        m,
        k,
        h,
        n,
        hidden_j,
        found_j: base,
        queries_used: queries,
        per_level,
    })
}

/// Queries per `log2 N` when iterating an exact `(m, k)` schedule.
pub fn rate(k: usize, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("rate needs m >= 2, got {m}")));
    }
    Ok(k as f64 / (m as f64).log2())
}

/// Queries implied for sorting `items` by binary insertion at this rate.
pub fn sort_queries(items: usize, k: usize, m: usize) -> Result<f64> {
    let n = items as f64;
    Ok(n * rate(k, m)? * n.log2().max(0.0))
}
