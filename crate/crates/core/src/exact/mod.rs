//! Cosine-series form of the exact-algorithm conditions.
//!
//! Writing `Q_l(e^{i theta}) = 1 + A_l(theta) + B_l(theta)` with
//! `a_r = a_{N-r}` and `b_r = -b_{N-r}` turns the matching conditions into
//! the alternating identities `B_1 = B_0`, `A_2 = A_1`, `B_3 = B_2`, ...
//! and the endpoint `A_k = B_k = 0`. An exact `k`-query invariant algorithm
//! exists iff the `k - 2` remaining free series can be chosen so every
//! `1 + A_l + B_l` is nonnegative on `[0, pi]`. Sine terms are dropped
//! throughout; they can always be set to zero.

mod search;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::check_size;

pub use search::{search_free_series, SearchOutcome, SearchParams};

/// Grid minima below this are reported as genuine negativity.
pub const INFEASIBLE_BELOW: f64 = -1e-9;

/// Symmetry tolerance when accepting externally supplied coefficients.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesClass {
    /// `c_r = c_{N-r}`; vanishes where `e^{i N theta} = -1`.
    A,
    /// `c_r = -c_{N-r}`; vanishes where `e^{i N theta} = 1`.
    B,
}

impl SeriesClass {
    fn sign(self) -> f64 {
        match self {
            SeriesClass::A => 1.0,
            SeriesClass::B => -1.0,
        }
    }

    /// Number of independent coefficients for size `n`.
    pub fn param_count(self, n: usize) -> usize {
        match self {
            SeriesClass::A => n / 2,
            SeriesClass::B => n.div_ceil(2) - 1,
        }
    }
}

/// `sum_{r=1}^{N-1} c_r cos(r theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosineSeries {
    pub n: usize,
    pub klass: SeriesClass,
    /// `coeffs[r - 1]` multiplies `cos(r theta)`.
    pub coeffs: Vec<f64>,
}

impl CosineSeries {
    pub fn new(n: usize, klass: SeriesClass, coeffs: Vec<f64>) -> Result<Self> {
        let s = CosineSeries { n, klass, coeffs };
        s.validate()?;
        Ok(s)
    }

    pub fn zero(n: usize, klass: SeriesClass) -> Self {
        CosineSeries {
            n,
            klass,
            coeffs: vec![0.0; n.saturating_sub(1)],
        }
    }

    /// Builds a series from its independent coefficients (`r = 1..` up to
    /// [`SeriesClass::param_count`]); the rest follow by symmetry.
    pub fn from_params(n: usize, klass: SeriesClass, params: &[f64]) -> Result<Self> {
        check_size(n)?;
        let count = klass.param_count(n);
        if params.len() != count {
            return Err(Error::Schema(format!(
                "{klass:?} series for n = {n} takes {count} parameters, got {}",
                params.len()
            )));
        }
        let mut coeffs = vec![0.0; n - 1];
        for (i, &v) in params.iter().enumerate() {
            let r = i + 1;
            coeffs[r - 1] = v;
            coeffs[n - r - 1] = klass.sign() * v;
        }
        Ok(CosineSeries { n, klass, coeffs })
    }

    pub fn params(&self) -> Vec<f64> {
        self.coeffs[..self.klass.param_count(self.n)].to_vec()
    }

    pub fn validate(&self) -> Result<()> {
        check_size(self.n)?;
        if self.coeffs.len() != self.n - 1 {
            return Err(Error::Schema(format!(
                "series for n = {} needs {} coefficients, got {}",
                self.n,
                self.n - 1,
                self.coeffs.len()
            )));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Schema("non-finite series coefficient".into()));
        }
        for r in 1..self.n {
            let a = self.coeffs[r - 1];
            let b = self.klass.sign() * self.coeffs[self.n - r - 1];
            if (a - b).abs() > SYMMETRY_TOL {
                return Err(Error::Contract(format!(
                    "{:?} symmetry broken at r = {r}: {a} vs {b}",
                    self.klass
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        eval_series(self, theta)
    }

    /// `sum_r r |c_r|`, a bound on `|d/dtheta|`.
    pub fn lipschitz(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (i + 1) as f64 * c.abs())
            .sum()
    }

    /// `sum_r r^2 |c_r|`, a bound on `|d^2/dtheta^2|`.
    pub fn curvature(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| ((i + 1) as f64).powi(2) * c.abs())
            .sum()
    }

    fn add(&self, other: &CosineSeries) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// `A_0 = cos theta + cos 2 theta + ... + cos (N-1) theta`.
pub fn a0(n: usize) -> Result<CosineSeries> {
    check_size(n)?;
    Ok(CosineSeries {
        n,
        klass: SeriesClass::A,
        coeffs: vec![1.0; n - 1],
    })
}

/// `B_0 = sum_r (1 - 2r/N) cos r theta`.
pub fn b0(n: usize) -> Result<CosineSeries> {
    check_size(n)?;
    let nf = n as f64;
    Ok(CosineSeries {
        n,
        klass: SeriesClass::B,
        coeffs: (1..n).map(|r| 1.0 - 2.0 * r as f64 / nf).collect(),
    })
}

/// `sum_r c_r cos(r theta)` by the Chebyshev recurrence
/// `cos((r+1) t) = 2 cos t cos(r t) - cos((r-1) t)` (Clenshaw form).
pub fn eval_series(series: &CosineSeries, theta: f64) -> f64 {
    eval_coeffs(&series.coeffs, theta)
}

fn eval_coeffs(coeffs: &[f64], theta: f64) -> f64 {
    let x = theta.cos();
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    // sum_{r>=1} c_r T_r(x) = b1 * x - b2
    b1 * x - b2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedPositive,
    NumericallyNonnegative,
    Infeasible,
}

/// Grid evidence for `1 + sum series(theta) >= 0` on `[0, pi]`.
///
/// Between two grid points at spacing `h = pi / grid_points`, the function
/// cannot fall below the smaller endpoint value by more than `L h / 2`
/// (Lipschitz) or `K h^2 / 8` (curvature bound against the chord). `margin`
/// is the larger of the two resulting lower bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCertificate {
    pub grid_points: usize,
    pub grid_min: f64,
    pub argmin: f64,
    pub lipschitz: f64,
    pub curvature: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

impl FeasibilityCertificate {
    pub fn is_feasible(&self) -> bool {
        self.verdict != Verdict::Infeasible
    }
}

/// Default certification grid, `max(4096, 64 N)` intervals.
pub fn default_grid(n: usize) -> usize {
    (64 * n).max(4096)
}

/// Evaluates `1 + sum series` on `grid_points + 1` equispaced angles in
/// `[0, pi]` and fills in the certificate.
pub fn certify_nonneg(
    one_plus: &[&CosineSeries],
    grid_points: usize,
) -> Result<FeasibilityCertificate> {
    let n = one_plus.first().map(|s| s.n).unwrap_or(2);
    if one_plus.iter().any(|s| s.n != n) {
        return Err(Error::Contract(
            "series of different sizes in one constraint".into(),
        ));
    }
    if grid_points < 8 * n {
        return Err(Error::Contract(format!(
            "grid of {grid_points} points is below 8N = {}",
            8 * n
        )));
    }
    let mut total = vec![0.0; n - 1];
    for s in one_plus {
        for (t, c) in total.iter_mut().zip(&s.coeffs) {
            *t += c;
        }
    }
    let h = PI / grid_points as f64;
    let (mut grid_min, mut argmin) = (f64::INFINITY, 0.0);
    for i in 0..=grid_points {
        let theta = i as f64 * h;
        let v = 1.0 + eval_coeffs(&total, theta);
        if v < grid_min {
            grid_min = v;
            argmin = theta;
        }
    }
    let lipschitz: f64 = one_plus.iter().map(|s| s.lipschitz()).sum();
    let curvature: f64 = one_plus.iter().map(|s| s.curvature()).sum();
    let margin = (grid_min - lipschitz * h / 2.0).max(grid_min - curvature * h * h / 8.0);
    let verdict = if grid_min < INFEASIBLE_BELOW {
        Verdict::Infeasible
    } else if margin >= 0.0 {
        Verdict::CertifiedPositive
    } else {
        Verdict::NumericallyNonnegative
    };
    Ok(FeasibilityCertificate {
        grid_points,
        grid_min,
        argmin,
        lipschitz,
        curvature,
        margin,
        verdict,
    })
}

/// Two queries: `1 + B_0 >= 0` is the only condition.
pub fn k2_feasible(n: usize) -> Result<(bool, FeasibilityCertificate)> {
    k2_feasible_with_grid(n, default_grid(n))
}

pub fn k2_feasible_with_grid(
    n: usize,
    grid_points: usize,
) -> Result<(bool, FeasibilityCertificate)> {
    let b = b0(n)?;
    let cert = certify_nonneg(&[&b], grid_points)?;
    Ok((cert.is_feasible(), cert))
}

/// One query: the chain forces `B_0 = B_1 = 0`.
pub fn k1_feasible(n: usize) -> Result<bool> {
    Ok(b0(n)?.is_zero())
}

/// The full sequence `A_0, B_0, ..., A_k, B_k` after the matching conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchingChain {
    pub n: usize,
    pub k: usize,
    pub a: Vec<CosineSeries>,
    pub b: Vec<CosineSeries>,
    pub free: Vec<String>,
}

/// Names of the free series for `k` queries: `A1, B2, A3, ...` up to stage `k - 2`.
pub fn free_series_names(k: usize) -> Vec<String> {
    (1..k.saturating_sub(1)).map(series_name).collect()
}

fn series_name(ell: usize) -> String {
    if ell % 2 == 1 {
        format!("A{ell}")
    } else {
        format!("B{ell}")
    }
}

/// Klass of the series introduced at stage `ell` (the one not inherited).
pub fn new_series_class(ell: usize) -> SeriesClass {
    if ell % 2 == 1 {
        SeriesClass::A
    } else {
        SeriesClass::B
    }
}

/// Unrolls the matching conditions. At odd stages `B_l = B_{l-1}` and `A_l`
/// is new; at even stages `A_l = A_{l-1}` and `B_l` is new. The new series of
/// stages `k - 1` and `k` are forced to zero by `A_k = B_k = 0`; the rest
/// come from `free`.
pub fn build_chain(
    n: usize,
    k: usize,
    free: &BTreeMap<String, CosineSeries>,
) -> Result<MatchingChain> {
    check_size(n)?;
    if k == 0 {
        return Err(Error::Domain("need k >= 1 queries".into()));
    }
    let names = free_series_names(k);
    for key in free.keys() {
        if !names.contains(key) {
            return Err(Error::Contract(format!(
                "unexpected free series {key}; k = {k} takes {names:?}"
            )));
        }
    }
    let mut a = vec![a0(n)?];
    let mut b = vec![b0(n)?];
    for ell in 1..=k {
        let klass = new_series_class(ell);
        let fresh = if ell + 2 <= k {
            let name = series_name(ell);
            let s = free
                .get(&name)
                .ok_or_else(|| Error::Contract(format!("missing free series {name}")))?;
            if s.n != n || s.klass != klass {
                return Err(Error::Contract(format!(
                    "free series {name} must be class {klass:?} with n = {n}"
                )));
            }
            s.validate()?;
            s.clone()
        } else {
            CosineSeries::zero(n, klass)
        };
        match klass {
            SeriesClass::A => {
                b.push(b[ell - 1].clone());
                a.push(fresh);
            }
            SeriesClass::B => {
                a.push(a[ell - 1].clone());
                b.push(fresh);
            }
        }
    }
    if !a[k].is_zero() || !b[k].is_zero() {
        return Err(Error::Infeasible(format!(
            "matching conditions leave a nonzero endpoint series for n = {n}, k = {k}"
        )));
    }
    Ok(MatchingChain {
        n,
        k,
        a,
        b,
        free: names,
    })
}

impl MatchingChain {
    /// Stages whose positivity is not automatic: `1 ..= k - 1`.
    pub fn constraint_stages(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.k.saturating_sub(1)
    }

    /// Nonzero series entering `1 + A_l + B_l >= 0`.
    pub fn constraint(&self, ell: usize) -> Vec<&CosineSeries> {
        [&self.a[ell], &self.b[ell]]
            .into_iter()
            .filter(|s| !s.is_zero())
            .collect()
    }

    /// Combined cosine coefficients of `A_l + B_l`.
    pub fn stage_coeffs(&self, ell: usize) -> Vec<f64> {
        self.a[ell].add(&self.b[ell])
    }

    pub fn certify(&self, grid_points: usize) -> Result<Vec<(usize, FeasibilityCertificate)>> {
        self.constraint_stages()
            .map(|ell| Ok((ell, certify_nonneg(&self.constraint(ell), grid_points)?)))
            .collect()
    }
}
