//! Simultaneous polynomial root finding by Aberth–Ehrlich iteration.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITERS: usize = 2000;

/// `(p(z), p'(z), sum |c_k| |z|^k)` by Horner's rule; coefficients low-to-high.
fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let az = z.norm();
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
        scale = scale * az + c.norm();
    }
    (p, dp, scale)
}

/// Evaluates a polynomial with coefficients ordered low-to-high.
pub fn eval_poly(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    horner(coeffs, z).0
}

/// Relative residual `|p(z)| / sum |c_k| |z|^k`.
pub fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let (p, _, s) = horner(coeffs, z);
    if s == 0.0 {
        0.0
    } else {
        p.norm() / s
    }
}

/// All roots of `sum c_k z^k` (coefficients low-to-high, nonzero leading
/// coefficient).
///
/// Iteration for a root stops once `|p(z)|` is within a small multiple of the
/// rounding error of its own evaluation, so multiple roots terminate at their
/// attainable accuracy instead of stalling.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    if c.is_empty() {
        return Err(Error::Factorization(
            "zero polynomial has no finite root set".into(),
        ));
    }
    let mut zeros = 0;
    while c.len() > 1 && c[0].norm() == 0.0 {
        c.remove(0);
        zeros += 1;
    }
    let deg = c.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if deg == 0 {
        return Ok(roots);
    }
    if deg == 1 {
        roots.push(-c[0] / c[1]);
        return Ok(roots);
    }

    let radius = (c[0].norm() / c[deg].norm()).powf(1.0 / deg as f64);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|i| Complex64::from_polar(radius, 2.0 * PI * i as f64 / deg as f64 + 0.4))
        .collect();
    let mut done = vec![false; deg];
    let eps = f64::EPSILON;
    for _ in 0..MAX_ITERS {
        let mut all = true;
        for i in 0..deg {
            if done[i] {
                continue;
            }
            let (p, dp, s) = horner(&c, z[i]);
            if p.norm() <= 8.0 * eps * s {
                done[i] = true;
                continue;
            }
            all = false;
            let ratio = p / dp;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    sum += 1.0 / (z[i] - z[j]);
                }
            }
            let w = ratio / (1.0 - ratio * sum);
            if !w.re.is_finite() || !w.im.is_finite() {
                // coincident estimates; nudge and continue
                let bump = 1e-8 * (1.0 + z[i].norm());
                z[i] += Complex64::new(bump, 1e-8);
                continue;
            }
            z[i] -= w;
            if w.norm() <= eps * z[i].norm() {
                done[i] = true;
            }
        }
        if all {
            break;
        }
    }
    if done.iter().any(|d| !d) {
        let worst = z
            .iter()
            .map(|&r| relative_residual(&c, r))
            .fold(0.0, f64::max);
        if worst > 1e-10 {
            return Err(Error::Factorization(format!(
                "root iteration did not converge (residual {worst:.2e})"
            )));
        }
    }
    roots.extend(z);
    Ok(roots)
}

/// Coefficients (low-to-high) of `prod (z - r)`.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (m, &a) in c.iter().enumerate() {
            next[m + 1] += a;
            next[m] -= a * r;
        }
        c = next;
    }
    c
}
