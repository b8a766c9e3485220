//! From a feasible Q-sequence to an executable schedule.
//!
//! Each intermediate `Q_l` is split as `P_l(z) conj(P_l(1/conj z))` by
//! pairing the roots of `z^M Q_l(z)` with their reflections in the unit
//! circle and keeping the inner root of each pair. The coefficients of `P_l`
//! are the first half of the position amplitudes of `psi_l`, and the stage
//! phases are the ratios `<p|psi_l> / <p|F_0|psi_{l-1}>`.

pub mod roots;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{build_chain, default_grid, CosineSeries, FeasibilityCertificate, SeriesClass};
use crate::hilbert::{
    check_size, reduce_phase, run_schedule, target_state, to_momentum, to_position, uniform_start,
    Basis, Oracle, PhaseSchedule, Sign, StateVector,
};

use roots::{poly_from_roots, poly_roots};

/// `|P(e^{i theta})|^2 = Q(e^{i theta})` must hold to this accuracy.
pub const FACTOR_TOL: f64 = 1e-8;
/// `|<p|psi_l>| = |<p|F_0|psi_{l-1}>|` must hold to this accuracy.
pub const MAGNITUDE_TOL: f64 = 1e-8;
/// Reflected roots must satisfy `|r conj(s) - 1| < PAIR_TOL`.
pub const PAIR_TOL: f64 = 1e-6;
/// Roots this close to modulus 1 are treated as lying on the circle.
pub const CIRCLE_TOL: f64 = 1e-7;

fn complex_pairs<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| [c.re, c.im]))
}

fn complex_pair_rows<S: Serializer>(
    v: &[Vec<Complex64>],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(
        v.iter()
            .map(|row| row.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()),
    )
}

/// Hermitian Laurent polynomial `sum_{r=-(N-1)}^{N-1} q_r z^r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaurentPoly {
    pub n: usize,
    /// `q[r + N - 1]` holds `q_r`.
    #[serde(serialize_with = "complex_pairs")]
    pub q: Vec<Complex64>,
}

impl LaurentPoly {
    pub fn new(n: usize, q: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        if q.len() != 2 * n - 1 {
            return Err(Error::Schema(format!(
                "Laurent polynomial for n = {n} needs {} coefficients",
                2 * n - 1
            )));
        }
        Ok(LaurentPoly { n, q })
    }

    pub fn coeff(&self, r: i64) -> Complex64 {
        self.q[(r + self.n as i64 - 1) as usize]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let shift = self.n as i32 - 1;
        self.q
            .iter()
            .enumerate()
            .map(|(i, c)| c * z.powi(i as i32 - shift))
            .sum()
    }

    /// `Q(e^{i theta})`, real for a Hermitian polynomial.
    pub fn eval_circle(&self, theta: f64) -> f64 {
        let mut v = self.coeff(0).re;
        for r in 1..self.n as i64 {
            let z = Complex64::from_polar(1.0, r as f64 * theta);
            v += 2.0 * (self.coeff(r) * z).re;
        }
        v
    }

    /// `P(z) conj(P(1 / conj z))`: `q_r = sum_m p_{m+r} conj(p_m)`.
    pub fn from_poly(p: &Poly) -> Self {
        let n = p.coeffs.len();
        let mut q = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
        for (l, pl) in p.coeffs.iter().enumerate() {
            for (m, pm) in p.coeffs.iter().enumerate() {
                q[l + n - 1 - m] += pl * pm.conj();
            }
        }
        LaurentPoly { n, q }
    }

    fn check_hermitian(&self) -> Result<()> {
        let scale = self.q.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        for r in 0..self.n as i64 {
            let d = (self.coeff(r) - self.coeff(-r).conj()).norm();
            if d > 1e-12 * scale {
                return Err(Error::Contract(format!(
                    "q_{r} is not conj(q_-{r}) (off by {d:.2e})"
                )));
            }
        }
        Ok(())
    }
}

/// Degree `N - 1` polynomial stored low-to-high: `coeffs[m]` multiplies `z^m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poly {
    #[serde(serialize_with = "complex_pairs")]
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        roots::eval_poly(&self.coeffs, z)
    }

    /// The polynomial of a stage state: `sqrt(2) sum_{x<N} <x|psi> z^{N-1-x}`.
    pub fn from_state(psi: &StateVector) -> Self {
        let pos = to_position(psi);
        let n = pos.n();
        let coeffs = (0..n)
            .map(|m| pos.amps()[n - 1 - m] * std::f64::consts::SQRT_2)
            .collect();
        Poly { coeffs }
    }
}

/// `Q_l = 1 + A_l + B_l` with `cos r theta = (z^r + z^-r) / 2`.
pub fn q_from_chain(a: &CosineSeries, b: &CosineSeries) -> Result<LaurentPoly> {
    if a.n != b.n || a.klass != SeriesClass::A || b.klass != SeriesClass::B {
        return Err(Error::Contract(
            "q_from_chain needs an A and a B series of equal n".into(),
        ));
    }
    let n = a.n;
    let mut q = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    q[n - 1] = Complex64::new(1.0, 0.0);
    for r in 1..n {
        let v = Complex64::new((a.coeffs[r - 1] + b.coeffs[r - 1]) / 2.0, 0.0);
        q[n - 1 + r] = v;
        q[n - 1 - r] = v;
    }
    LaurentPoly::new(n, q)
}

/// Splits a nonnegative Hermitian `Q` into `P(z) conj(P(1/conj z))`.
///
/// `P` keeps the root of modulus `<= 1` from each reflected pair (the
/// smaller argument on ties), is scaled by `sqrt(D)` with `D > 0`, and is
/// padded with factors of `z` up to degree `N - 1` when the top
/// coefficients of `Q` vanish.
pub fn spectral_factor(q: &LaurentPoly) -> Result<Poly> {
    q.check_hermitian()?;
    let n = q.n;
    let q0 = q.coeff(0).re;
    if q0 <= 0.0 {
        return Err(Error::Contract(format!("q_0 = {q0} must be positive")));
    }
    let scale = q.q.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let m = (1..n as i64)
        .rev()
        .find(|&r| q.coeff(r).norm() > 1e-14 * scale)
        .unwrap_or(0) as usize;

    let inner = if m == 0 {
        vec![Complex64::new(1.0, 0.0)]
    } else {
        // z^M Q(z), low-to-high
        let c: Vec<Complex64> = (0..=2 * m).map(|i| q.coeff(i as i64 - m as i64)).collect();
        let rts = poly_roots(&c)?;
        poly_from_roots(&select_inner_roots(&rts, &c)?)
    };
    // z^0 coefficient of |prod|^2 on the circle is its squared coefficient norm
    let norm2: f64 = inner.iter().map(|c| c.norm_sqr()).sum();
    let d = q0 / norm2;
    let pad = n - 1 - m;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (i, c) in inner.iter().enumerate() {
        coeffs[i + pad] = c * d.sqrt();
    }
    let p = Poly { coeffs };

    let residual = factor_residual(&p, q);
    if residual > FACTOR_TOL {
        return Err(Error::Factorization(format!(
            "|P|^2 differs from Q by {residual:.2e} on the circle"
        )));
    }
    Ok(p)
}

/// `max_theta | |P(e^{i theta})|^2 - Q(e^{i theta}) |` on a `64 N` grid.
pub fn factor_residual(p: &Poly, q: &LaurentPoly) -> f64 {
    let pts = 64 * q.n;
    (0..pts)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / pts as f64;
            let z = Complex64::from_polar(1.0, t);
            (p.eval(z).norm_sqr() - q.eval_circle(t)).abs()
        })
        .fold(0.0, f64::max)
}

/// Pairs every root with its reflection `1 / conj(r)` and returns one
/// representative per pair.
///
/// Roots on the unit circle have even multiplicity and are only found to
/// about `sqrt(eps)`; they are polished as simple roots of the derivative.
fn select_inner_roots(rts: &[Complex64], poly: &[Complex64]) -> Result<Vec<Complex64>> {
    let deriv: Vec<Complex64> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect();
    let k = rts.len();
    if !k.is_multiple_of(2) {
        return Err(Error::Factorization(format!("odd root count {k}")));
    }
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            cand.push(((rts[i] * rts[j].conj() - 1.0).norm(), i, j));
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used = vec![false; k];
    let mut out = Vec::with_capacity(k / 2);
    for (cost, i, j) in cand {
        if used[i] || used[j] {
            continue;
        }
        if cost >= PAIR_TOL {
            break;
        }
        used[i] = true;
        used[j] = true;
        let (a, b) = (rts[i], rts[j]);
        let on_circle = (a.norm() - 1.0).abs() < CIRCLE_TOL && (b.norm() - 1.0).abs() < CIRCLE_TOL;
        let pick = if on_circle {
            let mid = (a + b) / 2.0;
            polish_on_circle(&deriv, mid / mid.norm())
        } else if (a.norm() - b.norm()).abs() <= 1e-12 {
            if a.arg() <= b.arg() {
                a
            } else {
                b
            }
        } else if a.norm() < b.norm() {
            a
        } else {
            b
        };
        out.push(pick);
    }
    if used.iter().any(|u| !u) {
        let lone: Vec<String> = rts
            .iter()
            .zip(&used)
            .filter(|(_, u)| !**u)
            .map(|(r, _)| format!("{:.6}{:+.6}i", r.re, r.im))
            .collect();
        return Err(Error::Factorization(format!(
            "roots without a reflected partner: {}",
            lone.join(", ")
        )));
    }
    Ok(out)
}

/// Newton steps on `poly` from `z`, kept on the unit circle, stopping once
/// the residual stops improving.
fn polish_on_circle(poly: &[Complex64], mut z: Complex64) -> Complex64 {
    let second: Vec<Complex64> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect();
    let mut best = roots::relative_residual(poly, z);
    for _ in 0..8 {
        let d = roots::eval_poly(&second, z);
        if d.norm() == 0.0 {
            break;
        }
        let next = z - roots::eval_poly(poly, z) / d;
        let next = next / next.norm();
        let r = roots::relative_residual(poly, next);
        if r.is_nan() || r >= best {
            break;
        }
        best = r;
        z = next;
    }
    z
}

/// Position-basis state with `<x|psi> = coeff(z^{N-1-x}) / sqrt 2` and
/// `<x+N|psi> = (-1)^l <x|psi>`.
pub fn states_from_poly(p: &Poly, ell_parity: usize) -> Result<StateVector> {
    let n = p.coeffs.len();
    check_size(n)?;
    let sign = if ell_parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let mut amps = vec![Complex64::new(0.0, 0.0); 2 * n];
    for x in 0..n {
        let a = p.coeffs[n - 1 - x] / std::f64::consts::SQRT_2;
        amps[x] = a;
        amps[x + n] = a * sign;
    }
    let psi = StateVector::new(n, Basis::Position, amps)?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Contract(format!(
            "factor gives a state of norm {norm}"
        )));
    }
    Ok(psi)
}

fn support_parity(psi: &StateVector) -> Result<usize> {
    let m = to_momentum(psi);
    let mass = |par: usize| -> f64 {
        m.amps()
            .iter()
            .enumerate()
            .filter(|(p, _)| p % 2 == par)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    };
    let (even, odd) = (mass(0), mass(1));
    let parity = if even >= odd { 0 } else { 1 };
    let leak = even.min(odd).sqrt();
    if leak > MAGNITUDE_TOL {
        return Err(Error::Contract(format!(
            "state mixes momentum parities (minority weight {leak:.2e})"
        )));
    }
    Ok(parity)
}

/// Phases with `e^{i alpha(p)} <p|F_0|psi_prev> = <p|psi>` at the live parity
/// and `alpha(p) = 0` elsewhere.
pub fn phases_from_states(psi_prev: &StateVector, psi: &StateVector) -> Result<Vec<f64>> {
    Ok(stage_phases(psi_prev, psi)?.0)
}

/// Phases plus the largest magnitude mismatch seen.
fn stage_phases(psi_prev: &StateVector, psi: &StateVector) -> Result<(Vec<f64>, f64)> {
    let n = psi.n();
    let live = 1 - support_parity(psi_prev)?;
    let prop = to_momentum(&Oracle::insertion(n, 0)?.apply(psi_prev));
    let target = to_momentum(psi);
    let mut phases = vec![0.0; 2 * n];
    let mut worst = 0.0f64;
    for p in 0..2 * n {
        let (num, den) = (target.amps()[p], prop.amps()[p]);
        if p % 2 != live {
            worst = worst.max(num.norm());
            continue;
        }
        worst = worst.max((num.norm() - den.norm()).abs());
        if den.norm() >= 1e-12 {
            phases[p] = reduce_phase((num / den).arg());
        }
    }
    if worst > MAGNITUDE_TOL {
        return Err(Error::Contract(format!(
            "momentum magnitudes differ from the propagated state by {worst:.2e}"
        )));
    }
    Ok((phases, worst))
}

/// `<x|V|0> = (1/2N) sum_p e^{i alpha(p)} e^{i p x pi / N}`; the full matrix
/// is the circulant `<x|V|y> = <x - y mod 2N|V|0>`.
pub fn v_column(phases: &[f64], n: usize) -> Result<Vec<Complex64>> {
    if phases.len() != 2 * n {
        return Err(Error::Schema(format!("expected {} phases", 2 * n)));
    }
    let scale = 1.0 / ((2 * n) as f64).sqrt();
    let diag = phases
        .iter()
        .map(|&a| Complex64::from_polar(scale, a))
        .collect();
    Ok(to_position(&StateVector::new(n, Basis::Momentum, diag)?).into_amps())
}

/// Outcome of running a schedule against every oracle.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub n: usize,
    pub k: usize,
    pub success_probs: Vec<f64>,
    pub min_success: f64,
    /// `max_{i != j} |<final_i|final_j>|`.
    pub max_cross_overlap: f64,
    /// First column `<x|V_l|0>` of every stage.
    #[serde(serialize_with = "complex_pair_rows")]
    pub v_columns: Vec<Vec<Complex64>>,
    pub max_v_imag: f64,
    /// `max_j || final(j) - T^j final(0) ||`.
    pub translation_defect: f64,
}

impl VerificationReport {
    pub fn is_exact(&self, tol: f64) -> bool {
        self.min_success >= 1.0 - tol
    }
}

pub fn verify_schedule(schedule: &PhaseSchedule) -> Result<VerificationReport> {
    schedule.validate()?;
    let n = schedule.n;
    let runs: Vec<_> = (0..n)
        .map(|j| run_schedule(schedule, j))
        .collect::<Result<_>>()?;
    let success_probs: Vec<f64> = runs.iter().map(|r| r.success_prob).collect();
    let mut max_cross = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            max_cross = max_cross.max(runs[i].final_state.inner(&runs[j].final_state).norm());
        }
    }
    let base = &runs[0].final_state;
    let translation_defect = runs
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let t = crate::hilbert::translate(base, j as i64);
            t.amps()
                .iter()
                .zip(r.final_state.amps())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let v_columns: Vec<Vec<Complex64>> = schedule
        .stages
        .iter()
        .map(|st| v_column(st, n))
        .collect::<Result<_>>()?;
    let max_v_imag = v_columns
        .iter()
        .flatten()
        .map(|c| c.im.abs())
        .fold(0.0, f64::max);
    Ok(VerificationReport {
        n,
        k: schedule.k,
        min_success: success_probs.iter().copied().fold(f64::INFINITY, f64::min),
        success_probs,
        max_cross_overlap: max_cross,
        v_columns,
        max_v_imag,
        translation_defect,
    })
}

/// Per-stage numerical diagnostics of a synthesis.
#[derive(Clone, Debug, Serialize)]
pub struct StageDiagnostics {
    pub stage: usize,
    /// `max | |P|^2 - Q |` for factored stages; 0 for the fixed endpoint.
    pub factor_residual: f64,
    pub magnitude_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Synthesis {
    pub schedule: PhaseSchedule,
    pub report: VerificationReport,
    pub certificates: Vec<(usize, FeasibilityCertificate)>,
    pub stages: Vec<StageDiagnostics>,
    /// States `psi_0 ..= psi_k` (position basis).
    #[serde(skip)]
    pub states: Vec<StateVector>,
}

impl Synthesis {
    /// End-to-end success criterion used by the synthesis pipeline.
    pub fn exact(&self) -> bool {
        self.report.is_exact(1e-8)
    }
}

/// Builds and verifies an exact `k`-query schedule for size `n` from the
/// free series of its matching chain.
pub fn synthesize_exact(
    n: usize,
    k: usize,
    free: &BTreeMap<String, CosineSeries>,
) -> Result<Synthesis> {
    let chain = build_chain(n, k, free)?;
    let certificates = chain.certify(default_grid(n))?;
    if let Some((ell, c)) = certificates.iter().find(|(_, c)| !c.is_feasible()) {
        return Err(Error::Infeasible(format!(
            "1 + A_{ell} + B_{ell} reaches {:.3e} at theta = {:.6}",
            c.grid_min, c.argmin
        ))
        .at_stage(*ell));
    }

    let mut states = vec![uniform_start(n)?];
    let mut factor_res = vec![0.0; k + 1];
    for ell in 1..k {
        let stage = || -> Result<(StateVector, f64)> {
            let q = q_from_chain(&chain.a[ell], &chain.b[ell])?;
            let p = spectral_factor(&q)?;
            let res = factor_residual(&p, &q);
            Ok((states_from_poly(&p, ell % 2)?, res))
        };
        let (psi, res) = stage().map_err(|e| e.at_stage(ell))?;
        factor_res[ell] = res;
        states.push(psi);
    }
    states.push(target_state(0, Sign::for_queries(k), n)?);

    let mut stages = Vec::with_capacity(k);
    let mut diags = Vec::with_capacity(k);
    for ell in 1..=k {
        let (phases, mag) =
            stage_phases(&states[ell - 1], &states[ell]).map_err(|e| e.at_stage(ell))?;
        stages.push(phases);
        diags.push(StageDiagnostics {
            stage: ell,
            factor_residual: factor_res[ell],
            magnitude_residual: mag,
        });
    }
    let schedule = PhaseSchedule::new(n, stages)?;
    let report = verify_schedule(&schedule)?;
    Ok(Synthesis {
        schedule,
        report,
        certificates,
        stages: diags,
        states,
    })
}
