//! Max-min-slack search for the free series.
//!
//! With the free coefficients `x` and a slack `delta`, the problem
//!
//! ```text
//! maximize delta  s.t.  1 + A_l(theta_i) + B_l(theta_i) >= delta   for all stages l, grid points i
//! ```
//!
//! is a linear program. It is solved by constraint generation: a coarse
//! subset of grid rows is solved exactly, every grid row is checked against
//! the solution, violated local minima are added, and the loop repeats until
//! no row is violated. The result is the optimum of the full-grid LP.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::{
    b0, build_chain, default_grid, free_series_names, new_series_class, CosineSeries,
    FeasibilityCertificate, SeriesClass, Verdict,
};
use crate::error::{Error, Result};
use crate::hilbert::check_size;

#[derive(Clone, Debug)]
pub struct SearchParams {
    /// Grid intervals on `[0, pi]`; `None` uses [`default_grid`].
    pub grid_points: Option<usize>,
    /// Box bound on every free coefficient. Nonnegativity already forces
    /// `|a_r + b_r| <= 2`, so this never cuts off a feasible point.
    pub coeff_bound: f64,
    /// Grid doublings attempted when post-certification is inconclusive.
    pub max_rounds: usize,
    /// Rows counted as violated below `delta - tol`.
    pub tol: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            grid_points: None,
            coeff_bound: 4.0,
            max_rounds: 3,
            tol: 1e-11,
        }
    }
}

/// LP optimum on one grid.
#[derive(Clone, Debug, Serialize)]
pub struct SlackSolution {
    pub grid_points: usize,
    /// Optimal minimum slack `delta*` over all constraint rows.
    pub delta: f64,
    pub free: BTreeMap<String, CosineSeries>,
    /// Constraint-generation passes used.
    pub passes: usize,
    /// Grid rows in the final LP.
    pub active_rows: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub free: BTreeMap<String, CosineSeries>,
    pub certificates: Vec<(usize, FeasibilityCertificate)>,
    pub delta: f64,
    pub grid_points: usize,
    pub rounds: usize,
}

#[derive(Clone, Copy)]
enum Source {
    Fixed,
    Zero,
    Free(usize),
}

/// Where `A_l` and `B_l` come from, for `l = 0 ..= k`.
fn stage_sources(k: usize) -> Vec<(Source, Source)> {
    let mut out = vec![(Source::Fixed, Source::Fixed)];
    for ell in 1..=k {
        let fresh = if ell + 2 <= k {
            Source::Free(ell - 1)
        } else {
            Source::Zero
        };
        let (pa, pb) = out[ell - 1];
        out.push(match new_series_class(ell) {
            SeriesClass::A => (fresh, pb),
            SeriesClass::B => (pa, fresh),
        });
    }
    out
}

struct Model {
    n: usize,
    thetas: Vec<f64>,
    /// Per stage (1 ..= k-1): `1 + fixed series` at every grid point.
    fixed: Vec<Vec<f64>>,
    /// Per stage: free-series indices entering the constraint.
    uses: Vec<Vec<usize>>,
    classes: Vec<SeriesClass>,
    /// Variable offset of each free series.
    offsets: Vec<usize>,
    nvars: usize,
    /// `basis[s][j][i]`: value at grid point `i` of parameter `j` of series `s`.
    basis: Vec<Vec<Vec<f64>>>,
}

fn param_basis(n: usize, klass: SeriesClass, j: usize, theta: f64) -> f64 {
    let r = j + 1;
    if 2 * r == n {
        (r as f64 * theta).cos()
    } else {
        let s = if klass == SeriesClass::A { 1.0 } else { -1.0 };
        (r as f64 * theta).cos() + s * ((n - r) as f64 * theta).cos()
    }
}

impl Model {
    fn new(n: usize, k: usize, grid: usize) -> Result<Self> {
        let names = free_series_names(k);
        let classes: Vec<SeriesClass> = (1..=names.len()).map(new_series_class).collect();
        let mut offsets = Vec::new();
        let mut nvars = 0;
        for c in &classes {
            offsets.push(nvars);
            nvars += c.param_count(n);
        }
        let thetas: Vec<f64> = (0..=grid).map(|i| PI * i as f64 / grid as f64).collect();
        let b0 = b0(n)?;
        let b0_vals: Vec<f64> = thetas.iter().map(|&t| b0.eval(t)).collect();
        // A_0 never enters a constraint stage; B_0 does as B_1
        let sources = stage_sources(k);
        let mut fixed = Vec::new();
        let mut uses = Vec::new();
        for &(sa, sb) in &sources[1..k] {
            let mut f = vec![1.0; thetas.len()];
            let mut u = Vec::new();
            for src in [sa, sb] {
                match src {
                    Source::Fixed => f.iter_mut().zip(&b0_vals).for_each(|(v, b)| *v += b),
                    Source::Zero => {}
                    Source::Free(i) => u.push(i),
                }
            }
            fixed.push(f);
            uses.push(u);
        }
        let basis = classes
            .iter()
            .map(|&c| {
                (0..c.param_count(n))
                    .map(|j| thetas.iter().map(|&t| param_basis(n, c, j, t)).collect())
                    .collect()
            })
            .collect();
        Ok(Model {
            n,
            thetas,
            fixed,
            uses,
            classes,
            offsets,
            nvars,
            basis,
        })
    }

    fn row_value(&self, stage: usize, i: usize, x: &[f64]) -> f64 {
        let mut v = self.fixed[stage][i];
        for &s in &self.uses[stage] {
            for (j, col) in self.basis[s].iter().enumerate() {
                v += x[self.offsets[s] + j] * col[i];
            }
        }
        v
    }

    fn solve_rows(&self, rows: &[(usize, usize)], bound: f64) -> Result<(Vec<f64>, f64)> {
        let mut lp = Problem::new(OptimizationDirection::Maximize);
        let xs: Vec<_> = (0..self.nvars)
            .map(|_| lp.add_var(0.0, (-bound, bound)))
            .collect();
        let delta = lp.add_var(1.0, (-10.0, 1.0));
        for &(stage, i) in rows {
            let mut expr = vec![(delta, -1.0)];
            for &s in &self.uses[stage] {
                for (j, col) in self.basis[s].iter().enumerate() {
                    expr.push((xs[self.offsets[s] + j], col[i]));
                }
            }
            lp.add_constraint(expr, ComparisonOp::Ge, -self.fixed[stage][i]);
        }
        let sol = lp
            .solve()
            .map_err(|e| Error::Solver(e.to_string()))?
            .into_solution()
            .map_err(|_| Error::Solver("solve interrupted".into()))?;
        let x = xs.iter().map(|&v| sol.var_value(v)).collect();
        Ok((x, sol.var_value(delta)))
    }

    fn series(&self, x: &[f64]) -> Result<BTreeMap<String, CosineSeries>> {
        let names = free_series_names(self.classes.len() + 2);
        names
            .into_iter()
            .zip(&self.classes)
            .enumerate()
            .map(|(s, (name, &c))| {
                let p = &x[self.offsets[s]..self.offsets[s] + c.param_count(self.n)];
                Ok((name, CosineSeries::from_params(self.n, c, p)?))
            })
            .collect()
    }
}

/// Solves the max-min-slack LP on a grid of `grid_points` intervals.
pub fn solve_max_slack(
    n: usize,
    k: usize,
    grid_points: usize,
    params: &SearchParams,
) -> Result<SlackSolution> {
    check_size(n)?;
    if k < 2 {
        return Err(Error::Domain("the slack search needs k >= 2".into()));
    }
    let model = Model::new(n, k, grid_points)?;
    let npts = model.thetas.len();
    let stages = model.fixed.len();
    let stride = (npts / (16 * n)).max(1);
    let mut active: Vec<(usize, usize)> = (0..stages)
        .flat_map(|s| {
            (0..npts)
                .step_by(stride)
                .chain([npts - 1])
                .map(move |i| (s, i))
        })
        .collect();
    active.sort_unstable();
    active.dedup();
    let mut in_active = vec![vec![false; npts]; stages];
    for &(s, i) in &active {
        in_active[s][i] = true;
    }
    for pass in 1..=200 {
        let (x, delta) = model.solve_rows(&active, params.coeff_bound)?;
        let mut added = 0;
        for s in 0..stages {
            let vals: Vec<f64> = (0..npts).map(|i| model.row_value(s, i, &x)).collect();
            let mut cands: Vec<(f64, usize)> = (0..npts)
                .filter(|&i| !in_active[s][i] && vals[i] < delta - params.tol)
                .filter(|&i| {
                    // local minima of the row values
                    (i == 0 || vals[i] <= vals[i - 1]) && (i + 1 == npts || vals[i] <= vals[i + 1])
                })
                .map(|i| (vals[i], i))
                .collect();
            cands.sort_by(|a, b| a.0.total_cmp(&b.0));
            for &(_, i) in cands.iter().take(64) {
                in_active[s][i] = true;
                active.push((s, i));
                added += 1;
            }
            // a violated row that is not a strict local minimum still needs a cut
            if cands.is_empty() {
                if let Some(i) = (0..npts)
                    .filter(|&i| !in_active[s][i] && vals[i] < delta - params.tol)
                    .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
                {
                    in_active[s][i] = true;
                    active.push((s, i));
                    added += 1;
                }
            }
        }
        if added == 0 {
            return Ok(SlackSolution {
                grid_points,
                delta,
                free: model.series(&x)?,
                passes: pass,
                active_rows: active.len(),
            });
        }
    }
    Err(Error::Solver(
        "constraint generation did not converge".into(),
    ))
}

/// Searches the free series of a `k`-query chain for size `n`.
///
/// Returns `None` when the LP optimum on the grid is negative, which is
/// strong evidence (not proof) that no exact algorithm exists. If the
/// certificates at the solve grid are only numerically nonnegative, the grid
/// is doubled and the LP re-solved, up to `max_rounds` times.
pub fn search_free_series(
    n: usize,
    k: usize,
    params: &SearchParams,
) -> Result<Option<SearchOutcome>> {
    check_size(n)?;
    if k < 2 {
        return Ok(if super::k1_feasible(n)? && k == 1 {
            Some(SearchOutcome {
                free: BTreeMap::new(),
                certificates: Vec::new(),
                delta: 1.0,
                grid_points: 0,
                rounds: 0,
            })
        } else {
            None
        });
    }
    let base = params.grid_points.unwrap_or_else(|| default_grid(n));
    let mut last = None;
    for round in 0..=params.max_rounds {
        let grid = base << round;
        let sol = solve_max_slack(n, k, grid, params)?;
        if sol.delta < 0.0 {
            return Ok(None);
        }
        let chain = build_chain(n, k, &sol.free)?;
        let certificates = chain.certify(grid)?;
        if certificates
            .iter()
            .any(|(_, c)| c.verdict == Verdict::Infeasible)
        {
            return Ok(None);
        }
        let done = certificates
            .iter()
            .all(|(_, c)| c.verdict == Verdict::CertifiedPositive);
        last = Some(SearchOutcome {
            free: sol.free,
            certificates,
            delta: sol.delta,
            grid_points: grid,
            rounds: round + 1,
        });
        if done {
            break;
        }
    }
    Ok(last)
}
