//! The doubled-domain state space.
//!
//! Position basis vectors `|x>` run over `x = 0..2N`. The momentum basis is
//! the discrete Fourier basis with `<x|p> = e^{i p x pi / N} / sqrt(2N)`; that
//! sign convention is used by every module in the crate. The translation
//! `T|x> = |x + 1 mod 2N>` is diagonal in momentum with eigenvalue
//! `e^{-i p pi / N}`, so any unitary diagonal in momentum commutes with it.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used for norm and support checks inside this module.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Position,
    Momentum,
}

/// Relative sign of the `|j>` and `|j + N>` components of a target state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    /// Target sign of a `k`-query algorithm: `+` for even `k`, `-` for odd.
    pub fn for_queries(k: usize) -> Self {
        if k.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A state of the `2N`-dimensional space, tagged with the basis its
/// amplitudes are expressed in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawState", into = "RawState")]
pub struct StateVector {
    n: usize,
    basis: Basis,
    amps: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawState {
    n: usize,
    basis: Basis,
    amps: Vec<[f64; 2]>,
}

impl TryFrom<RawState> for StateVector {
    type Error = Error;

    fn try_from(raw: RawState) -> Result<Self> {
        let amps = raw
            .amps
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        StateVector::new(raw.n, raw.basis, amps)
    }
}

impl From<StateVector> for RawState {
    fn from(s: StateVector) -> Self {
        RawState {
            n: s.n,
            basis: s.basis,
            amps: s.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

pub(crate) fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidSize(n))
    } else {
        Ok(())
    }
}

impl StateVector {
    /// Wraps raw amplitudes. The length must be `2n`; normalization is the
    /// caller's responsibility.
    pub fn new(n: usize, basis: Basis, amps: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        if amps.len() != 2 * n {
            return Err(Error::Schema(format!(
                "state for n = {n} needs {} amplitudes, got {}",
                2 * n,
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Schema("non-finite amplitude".into()));
        }
        Ok(StateVector { n, basis, amps })
    }

    /// The basis vector `|index>` of the given basis.
    pub fn basis_vector(n: usize, basis: Basis, index: usize) -> Result<Self> {
        check_size(n)?;
        if index >= 2 * n {
            return Err(Error::Contract(format!(
                "basis index {index} out of range for n = {n}"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, basis, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, converting `other` to this state's basis if needed.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.n, other.n);
        let other = other.in_basis(self.basis);
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn in_basis(&self, basis: Basis) -> StateVector {
        match basis {
            Basis::Position => to_position(self),
            Basis::Momentum => to_momentum(self),
        }
    }

    /// Multiplies every amplitude by a common phase factor.
    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            n: self.n,
            basis: self.basis,
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest momentum amplitude modulus at momenta of the given parity.
    pub fn parity_leak(&self, parity: usize) -> f64 {
        let m = self.in_basis(Basis::Momentum);
        m.amps
            .iter()
            .enumerate()
            .filter(|(p, _)| p % 2 == parity % 2)
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(len)
        } else {
            p.plan_fft_inverse(len)
        }
    })
}

fn transform(amps: &[Complex64], forward: bool) -> Vec<Complex64> {
    let len = amps.len();
    let mut buf = amps.to_vec();
    fft_plan(len, forward).process(&mut buf);
    let scale = 1.0 / (len as f64).sqrt();
    buf.iter_mut().for_each(|a| *a *= scale);
    buf
}

/// `<p|psi> = sum_x e^{-i p x pi / N} <x|psi> / sqrt(2N)`.
pub fn to_momentum(state: &StateVector) -> StateVector {
    match state.basis {
        Basis::Momentum => state.clone(),
        Basis::Position => StateVector {
            n: state.n,
            basis: Basis::Momentum,
            amps: transform(&state.amps, true),
        },
    }
}

/// `<x|psi> = sum_p e^{i p x pi / N} <p|psi> / sqrt(2N)`.
pub fn to_position(state: &StateVector) -> StateVector {
    match state.basis {
        Basis::Position => state.clone(),
        Basis::Momentum => StateVector {
            n: state.n,
            basis: Basis::Position,
            amps: transform(&state.amps, false),
        },
    }
}

/// The translation-invariant start state `sum_x |x> / sqrt(2N)`, which is the
/// momentum basis vector `p = 0`.
pub fn uniform_start(n: usize) -> Result<StateVector> {
    check_size(n)?;
    let a = 1.0 / ((2 * n) as f64).sqrt();
    Ok(StateVector {
        n,
        basis: Basis::Position,
        amps: vec![Complex64::new(a, 0.0); 2 * n],
    })
}

/// `f_j(x)` on `0..N`: `-1` below the insertion point, `+1` from it on.
pub fn insertion_fn(j: usize, x: usize) -> i8 {
    if x < j {
        -1
    } else {
        1
    }
}

/// A diagonal sign oracle on the doubled domain.
///
/// Built from a function `f` on `0..N` and extended antiperiodically:
/// `F(x) = f(x)` for `x < N` and `F(x) = -f(x - N)` above.
#[derive(Clone, Debug, PartialEq)]
pub struct Oracle {
    n: usize,
    signs: Vec<f64>,
}

impl Oracle {
    /// The insertion oracle `F_j`.
    pub fn insertion(n: usize, j: usize) -> Result<Self> {
        check_size(n)?;
        if j >= n {
            return Err(Error::InvalidOracle { j, n });
        }
        Ok(Self::from_fn(n, |x| insertion_fn(j, x)))
    }

    /// Doubles an arbitrary `+-1` function on `0..n`.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> i8) -> Self {
        let mut signs = vec![0.0; 2 * n];
        for x in 0..n {
            let v = if f(x) < 0 { -1.0 } else { 1.0 };
            signs[x] = v;
            signs[x + n] = -v;
        }
        Oracle { n, signs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Applies the oracle, returning the state in the basis it came in.
    pub fn apply(&self, state: &StateVector) -> StateVector {
        debug_assert_eq!(state.n, self.n);
        let pos = to_position(state);
        let amps = pos
            .amps
            .iter()
            .zip(&self.signs)
            .map(|(a, s)| a * *s)
            .collect();
        let out = StateVector {
            n: self.n,
            basis: Basis::Position,
            amps,
        };
        out.in_basis(state.basis)
    }
}

/// One query to `F_j`.
pub fn apply_oracle(j: usize, state: &StateVector) -> Result<StateVector> {
    Ok(Oracle::insertion(state.n, j)?.apply(state))
}

/// `T^t` for any integer `t` (negative values translate backwards).
pub fn translate(state: &StateVector, t: i64) -> StateVector {
    let dim = state.dim();
    let shift = t.rem_euclid(dim as i64) as usize;
    let amps = match state.basis {
        Basis::Position => {
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for (x, a) in state.amps.iter().enumerate() {
                out[(x + shift) % dim] = *a;
            }
            out
        }
        Basis::Momentum => state
            .amps
            .iter()
            .enumerate()
            .map(|(p, a)| {
                let ang = -PI * ((p * shift) % dim) as f64 / state.n as f64;
                a * Complex64::from_polar(1.0, ang)
            })
            .collect(),
    };
    StateVector {
        n: state.n,
        basis: state.basis,
        amps,
    }
}

/// `<p|F_0|q>`: `i e^{-i pi d / 2N} / (N sin(pi d / 2N))` for odd
/// `d = (q - p) mod 2N`, zero for even `d`.
pub fn oracle_momentum_element(p: usize, q: usize, n: usize) -> Complex64 {
    let dim = 2 * n as i64;
    let d = (q as i64 - p as i64).rem_euclid(dim);
    if d % 2 == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let u = PI * d as f64 / dim as f64;
    Complex64::i() * Complex64::from_polar(1.0, -u) / (n as f64 * u.sin())
}

/// `(|j> +- |j + N>) / sqrt(2)` in the position basis.
pub fn target_state(j: usize, sign: Sign, n: usize) -> Result<StateVector> {
    check_size(n)?;
    if j >= n {
        return Err(Error::InvalidOracle { j, n });
    }
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * n];
    amps[j] = Complex64::new(a, 0.0);
    amps[j + n] = Complex64::new(a * sign.value(), 0.0);
    Ok(StateVector {
        n,
        basis: Basis::Position,
        amps,
    })
}

/// Per-stage momentum phases `alpha_l(p)` defining `V_l |p> = e^{i alpha_l(p)} |p>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub n: usize,
    pub k: usize,
    pub stages: Vec<Vec<f64>>,
}

/// Reduces an angle to `[0, 2 pi)`.
pub fn reduce_phase(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

impl PhaseSchedule {
    /// Builds a validated schedule with every phase reduced to `[0, 2 pi)`.
    pub fn new(n: usize, stages: Vec<Vec<f64>>) -> Result<Self> {
        let s = PhaseSchedule {
            n,
            k: stages.len(),
            stages: stages
                .into_iter()
                .map(|st| st.into_iter().map(reduce_phase).collect())
                .collect(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks shape and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Schema(format!("schedule n = {} < 2", self.n)));
        }
        if self.stages.len() != self.k {
            return Err(Error::Schema(format!(
                "schedule declares k = {} but has {} stages",
                self.k,
                self.stages.len()
            )));
        }
        for (l, st) in self.stages.iter().enumerate() {
            if st.len() != 2 * self.n {
                return Err(Error::Schema(format!(
                    "stage {} has {} phases, expected {}",
                    l + 1,
                    st.len(),
                    2 * self.n
                )));
            }
            if st.iter().any(|a| !a.is_finite()) {
                return Err(Error::Schema(format!(
                    "stage {} has a non-finite phase",
                    l + 1
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: PhaseSchedule =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Applies `V_stage` (1-based) to a state; the result is in momentum basis.
    pub fn apply_stage(&self, stage: usize, state: &StateVector) -> StateVector {
        let m = to_momentum(state);
        let amps = m
            .amps
            .iter()
            .zip(&self.stages[stage - 1])
            .map(|(a, alpha)| a * Complex64::from_polar(1.0, *alpha))
            .collect();
        StateVector {
            n: self.n,
            basis: Basis::Momentum,
            amps,
        }
    }
}

/// Final state and success probability of one schedule execution.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub final_state: StateVector,
    pub success_prob: f64,
}

/// Runs `V_k F V_{k-1} ... V_1 F |s>` with an arbitrary doubled-domain
/// oracle, returning the final state in the position basis.
pub fn run_with_oracle(schedule: &PhaseSchedule, oracle: &Oracle) -> Result<StateVector> {
    schedule.validate()?;
    if oracle.n() != schedule.n {
        return Err(Error::Schema(format!(
            "oracle size {} does not match schedule n = {}",
            oracle.n(),
            schedule.n
        )));
    }
    let mut psi = uniform_start(schedule.n)?;
    for stage in 1..=schedule.k {
        psi = oracle.apply(&psi);
        psi = schedule.apply_stage(stage, &psi);
    }
    Ok(to_position(&psi))
}

/// Executes the schedule against `F_j` and scores it against `|j +->`
/// (`+` for even `k`, `-` for odd).
pub fn run_schedule(schedule: &PhaseSchedule, j: usize) -> Result<RunOutcome> {
    schedule.validate()?;
    let oracle = Oracle::insertion(schedule.n, j)?;
    let final_state = run_with_oracle(schedule, &oracle)?;
    let target = target_state(j, Sign::for_queries(schedule.k), schedule.n)?;
    let success_prob = target.inner(&final_state).norm_sqr();
    Ok(RunOutcome {
        final_state,
        success_prob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn uniform_start_amplitudes() {
        let s = uniform_start(6).unwrap();
        assert_eq!(s.amps().len(), 12);
        for a in s.amps() {
            assert!((a.re - 0.288_675_134_594_812_9).abs() < 1e-12);
        }
        let s2 = uniform_start(2).unwrap();
        assert!(s2.amps().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
        assert!(matches!(uniform_start(1), Err(Error::InvalidSize(1))));
    }

    #[test]
    fn uniform_start_is_zero_momentum() {
        let m = to_momentum(&uniform_start(6).unwrap());
        assert!(close(m.amps()[0], Complex64::new(1.0, 0.0), 1e-12));
        assert!(m.amps()[1..].iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn oracle_sign_patterns() {
        let o = Oracle::insertion(3, 1).unwrap();
        assert_eq!(o.signs(), &[-1.0, 1.0, 1.0, 1.0, -1.0, -1.0]);
        let o0 = Oracle::insertion(5, 0).unwrap();
        assert!(o0.signs()[..5].iter().all(|&s| s == 1.0));
        assert!(o0.signs()[5..].iter().all(|&s| s == -1.0));
        assert!(matches!(
            Oracle::insertion(3, 3),
            Err(Error::InvalidOracle { j: 3, n: 3 })
        ));
    }

    #[test]
    fn oracle_keeps_momentum_basis() {
        let s = to_momentum(&uniform_start(4).unwrap());
        let out = apply_oracle(2, &s).unwrap();
        assert_eq!(out.basis(), Basis::Momentum);
        let back = apply_oracle(2, &out).unwrap();
        for (a, b) in back.amps().iter().zip(s.amps()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn position_delta_in_momentum() {
        let x0 = StateVector::basis_vector(2, Basis::Position, 0).unwrap();
        let m = to_momentum(&x0);
        assert!(m
            .amps()
            .iter()
            .all(|a| close(*a, Complex64::new(0.5, 0.0), 1e-12)));
    }

    #[test]
    fn full_cycle_translation_is_identity() {
        let s = target_state(1, Sign::Minus, 5).unwrap();
        let t = translate(&s, 10);
        assert_eq!(t.amps(), s.amps());
        let m = to_momentum(&s);
        let tm = translate(&m, 10);
        for (a, b) in tm.amps().iter().zip(m.amps()) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn translation_eigenphase_in_momentum() {
        let n = 7;
        for p in 0..2 * n {
            let v = StateVector::basis_vector(n, Basis::Momentum, p).unwrap();
            let t = translate(&v, 1);
            let expect = Complex64::from_polar(1.0, -(p as f64) * PI / n as f64);
            assert!(close(t.amps()[p], expect, 1e-12));
            // the same answer through the position basis
            let tp = to_momentum(&translate(&to_position(&v), 1));
            assert!(close(tp.amps()[p], expect, 1e-12));
        }
    }

    #[test]
    fn even_difference_elements_vanish() {
        assert_eq!(oracle_momentum_element(3, 5, 6), Complex64::new(0.0, 0.0));
        assert_eq!(oracle_momentum_element(0, 0, 6), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn odd_column_sum_matches_cosecant_sum() {
        let n = 9;
        let lhs: f64 = (1..2 * n)
            .step_by(2)
            .map(|p| oracle_momentum_element(p, 0, n).norm())
            .sum();
        let rhs: f64 = (1..2 * n)
            .step_by(2)
            .map(|p| 1.0 / (PI * p as f64 / (2 * n) as f64).sin())
            .sum::<f64>()
            / n as f64;
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn targets_in_momentum_basis() {
        let n = 5;
        let r = 1.0 / (n as f64).sqrt();
        let plus = to_momentum(&target_state(0, Sign::Plus, n).unwrap());
        let minus = to_momentum(&target_state(0, Sign::Minus, n).unwrap());
        for p in 0..2 * n {
            let (e, o) = if p % 2 == 0 { (r, 0.0) } else { (0.0, r) };
            assert!(close(plus.amps()[p], Complex64::new(e, 0.0), 1e-12));
            assert!(close(minus.amps()[p], Complex64::new(o, 0.0), 1e-12));
        }
        for j in 0..n {
            for jj in 0..n {
                let a = target_state(j, Sign::Plus, n).unwrap();
                let b = target_state(jj, Sign::Plus, n).unwrap();
                let expect = if j == jj { 1.0 } else { 0.0 };
                assert!((a.inner(&b).re - expect).abs() < 1e-15);
            }
        }
        assert!(target_state(5, Sign::Plus, 5).is_err());
    }

    #[test]
    fn malformed_schedules_are_schema_errors() {
        let bad = PhaseSchedule {
            n: 3,
            k: 2,
            stages: vec![vec![0.0; 6]],
        };
        assert!(matches!(run_schedule(&bad, 0), Err(Error::Schema(_))));
        let short = PhaseSchedule {
            n: 3,
            k: 1,
            stages: vec![vec![0.0; 5]],
        };
        assert!(matches!(short.validate(), Err(Error::Schema(_))));
        assert!(PhaseSchedule::from_json("{\"n\": 3}").is_err());
    }

    #[test]
    fn phases_are_reduced() {
        let s = PhaseSchedule::new(2, vec![vec![-0.5, 7.0, 2.0 * PI, 1.0]]).unwrap();
        assert!(s.stages[0].iter().all(|a| (0.0..2.0 * PI).contains(a)));
        assert!((s.stages[0][0] - (2.0 * PI - 0.5)).abs() < 1e-15);
        assert_eq!(s.stages[0][2], 0.0);
    }

    #[test]
    fn state_json_uses_pairs() {
        let s = target_state(0, Sign::Minus, 2).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("[[0.7071067811865476,0.0]"));
        let back: StateVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
