//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use invinsert::bounds::{harmonic_sum, overlap_bound};
use invinsert::compose::{compose_solve, rate};
use invinsert::exact::{
    build_chain, k1_feasible, k2_feasible, search_free_series, SearchParams, Verdict,
};
use invinsert::greedy::{greedy_run, target_overlap};
use invinsert::hilbert::{
    oracle_momentum_element, run_with_oracle, to_momentum, translate, uniform_start, Oracle,
};
use invinsert::synth::{spectral_factor, synthesize_exact, LaurentPoly, Poly};
use invinsert::{Complex64, PhaseSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TABLE: [(usize, [f64; 6]); 5] = [
    (64, [0.2036, 0.6495, 0.9615, 0.9997, 1.000, 1.000]),
    (256, [0.0788, 0.3886, 0.8221, 0.9907, 0.9999, 1.000]),
    (1024, [0.0282, 0.2000, 0.5981, 0.9324, 0.9983, 1.000]),
    (2048, [0.0165, 0.1374, 0.4818, 0.8690, 0.9939, 0.9997]),
    (4096, [0.0096, 0.0922, 0.3755, 0.7834, 0.9819, 0.9992]),
];

const PROPERTY_SIZES: [usize; 6] = [2, 3, 6, 8, 16, 52];

struct Gate {
    failures: usize,
}

impl Gate {
    fn record(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!(
            "[{}] {id}. {name}: {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn table_reproduction() -> (bool, String) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (n, row) in TABLE {
        let trace = greedy_run(n, 6).expect("greedy run");
        for (i, &cell) in row.iter().enumerate() {
            let got = trace.probs[i + 1];
            let ok = if cell == 1.0 {
                got >= 0.9995
            } else {
                (got - cell).abs() <= 1e-4
            };
            if cell != 1.0 {
                worst = worst.max((got - cell).abs());
            }
            if !ok {
                bad.push(format!("N={n},k={} got {got:.5}", i + 1));
            }
        }
    }
    let t = start.elapsed();
    let ok = bad.is_empty() && t <= Duration::from_secs(60);
    (
        ok,
        format!(
            "30 cells, max deviation {worst:.2e}, {:.2?} (limit 60 s){}",
            t,
            fmt_bad(&bad)
        ),
    )
}

fn fmt_bad(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join(", "))
    }
}

fn harmonic_approximation() -> (bool, String) {
    let mut bad = Vec::new();
    let mut worst = (0, 0.0f64);
    for n in 3..=4096 {
        let e = harmonic_sum(n).expect("sum").relative_error();
        if e >= 1e-3 {
            bad.push(format!("N={n} rel err {e:.4e}"));
        }
        if e > worst.1 {
            worst = (n, e);
        }
    }
    let at3 = harmonic_sum(3).unwrap().relative_error();
    (
        bad.is_empty(),
        format!(
            "rel err at N=3 is {at3:.4e} (need < 1e-3); worst N={} {:.4e}{}",
            worst.0,
            worst.1,
            fmt_bad(&bad)
        ),
    )
}

fn k2_boundary() -> (bool, String) {
    let mut bad = Vec::new();
    let mut at7 = 0.0;
    for n in 2..=64 {
        let (ok, cert) = k2_feasible(n).expect("certificate");
        if n == 7 {
            at7 = cert.grid_min;
        }
        if ok != (n <= 6) {
            bad.push(format!("N={n}"));
        }
    }
    (
        bad.is_empty(),
        format!(
            "true for 2..6, false for 7..64; N=7 minimum of 1+B0 is {at7:.5}{}",
            fmt_bad(&bad)
        ),
    )
}

fn n6_synthesis() -> (bool, String) {
    let s = synthesize_exact(6, 2, &BTreeMap::new()).expect("synthesis");
    let r = &s.report;
    let reference = [
        [
            0.7572, -0.3473, -0.0034, -0.0640, -0.1367, -0.2011, 0.2428, 0.3473, 0.0034, 0.0640,
            0.1367, 0.2011,
        ],
        [
            0.9122, -0.2022, -0.0380, 0.0736, 0.1258, 0.1286, -0.0878, -0.2022, -0.0380, 0.0736,
            0.1258, 0.1286,
        ],
    ];
    let table_dev = reference
        .iter()
        .zip(&r.v_columns)
        .flat_map(|(p, c)| p.iter().zip(c).map(|(a, b)| (a - b.re).abs()))
        .fold(0.0, f64::max);
    let ok = r.min_success >= 1.0 - 1e-9 && r.max_cross_overlap <= 1e-9 && r.max_v_imag <= 1e-9;
    (
        ok,
        format!(
            "min success {:.15}, max cross overlap {:.2e}, max imag {:.2e}; reference V table {} (max dev {table_dev:.1e}, informative)",
            r.min_success,
            r.max_cross_overlap,
            r.max_v_imag,
            if table_dev <= 1e-3 { "matched" } else { "not matched" }
        ),
    )
}

fn n52_three_queries() -> (bool, String) {
    let start = Instant::now();
    let found = search_free_series(52, 3, &SearchParams::default()).expect("search");
    let t = start.elapsed();
    let Some(found) = found else {
        return (false, format!("no free series found ({t:.2?})"));
    };
    let certified = found
        .certificates
        .iter()
        .all(|(_, c)| c.verdict == Verdict::CertifiedPositive);
    let chain = build_chain(52, 3, &found.free).expect("chain");
    let fine = chain.certify(10 * found.grid_points).expect("fine grid");
    let confirmed = fine.iter().all(|(_, c)| c.is_feasible());
    let s = synthesize_exact(52, 3, &found.free).expect("synthesis");
    let ok = (certified || confirmed)
        && s.report.min_success >= 1.0 - 1e-8
        && t <= Duration::from_secs(600);
    (
        ok,
        format!(
            "slack {:.5}, constraints {}, 10x grid min {:.5}, min success {:.12}, search {:.2?} (limit 10 min)",
            found.delta,
            if certified { "certified positive" } else { "numerically nonnegative" },
            fine.iter().map(|(_, c)| c.grid_min).fold(f64::INFINITY, f64::min),
            s.report.min_success,
            t
        ),
    )
}

fn composition() -> (bool, String) {
    let schedule = synthesize_exact(6, 2, &BTreeMap::new())
        .expect("synthesis")
        .schedule;
    let mut bad = Vec::new();
    for j in 0..36 {
        match compose_solve(6, 2, 2, &schedule, j) {
            Ok(r) if r.found_j == j && r.queries_used == 4 => {}
            Ok(r) => bad.push(format!("j={j} found {} in {}", r.found_j, r.queries_used)),
            Err(e) => bad.push(format!("j={j}: {e}")),
        }
    }
    let classical = 36f64.log2().ceil() as usize;
    (
        bad.is_empty() && 4 < classical,
        format!(
            "36/36 hidden j recovered with 4 queries each, classical needs {classical}{}",
            fmt_bad(&bad)
        ),
    )
}

fn rate_constant() -> (bool, String) {
    let r = rate(3, 52).unwrap();
    (r < 0.53, format!("rate(3, 52) = {r:.5}"))
}

fn random_schedule(rng: &mut ChaCha8Rng, n: usize, k: usize) -> PhaseSchedule {
    let stages = (0..k)
        .map(|_| (0..2 * n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect())
        .collect();
    PhaseSchedule::new(n, stages).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> invinsert::StateVector {
    let amps: Vec<Complex64> = (0..2 * n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    invinsert::StateVector::new(
        n,
        invinsert::Basis::Position,
        amps.iter().map(|a| a / norm).collect(),
    )
    .unwrap()
}

fn dist(a: &invinsert::StateVector, b: &invinsert::StateVector) -> f64 {
    let b = b.in_basis(a.basis());
    a.amps()
        .iter()
        .zip(b.amps())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn properties() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut bad = Vec::new();

    // norm preservation and parity support along random invariant runs
    for n in PROPERTY_SIZES {
        for _ in 0..4 {
            let psi = random_state(&mut rng, n);
            let j = rng.gen_range(0..n);
            let after = Oracle::insertion(n, j).unwrap().apply(&psi);
            if (to_momentum(&after).norm() - 1.0).abs() > 1e-12 {
                bad.push(format!("norm N={n}"));
            }
            let sched = random_schedule(&mut rng, n, 3);
            let oracle = Oracle::insertion(n, 0).unwrap();
            let mut s = uniform_start(n).unwrap();
            for stage in 1..=3 {
                s = sched.apply_stage(stage, &oracle.apply(&s));
                if (s.norm() - 1.0).abs() > 1e-12 || s.parity_leak(1 - stage % 2) > 1e-12 {
                    bad.push(format!("parity/norm N={n} stage {stage}"));
                }
            }
        }
    }

    // translation covariance of random schedules
    for n in PROPERTY_SIZES {
        let sched = random_schedule(&mut rng, n, 3);
        let base = run_with_oracle(&sched, &Oracle::insertion(n, 0).unwrap()).unwrap();
        for j in 0..n {
            let fin = run_with_oracle(&sched, &Oracle::insertion(n, j).unwrap()).unwrap();
            if dist(&fin, &translate(&base, j as i64)) > 1e-12 {
                bad.push(format!("translation N={n} j={j}"));
            }
        }
    }

    // momentum matrix elements against a direct sum over positions
    for n in 2..=32 {
        let dim = 2 * n;
        let f: Vec<f64> = (0..dim).map(|x| if x < n { 1.0 } else { -1.0 }).collect();
        for p in 0..dim {
            for q in 0..dim {
                let direct: Complex64 = (0..dim)
                    .map(|x| {
                        Complex64::from_polar(
                            f[x],
                            PI * ((q as f64 - p as f64) * x as f64) / n as f64,
                        )
                    })
                    .sum::<Complex64>()
                    / dim as f64;
                if (direct - oracle_momentum_element(p, q, n)).norm() > 1e-12 {
                    bad.push(format!("matrix element N={n} p={p} q={q}"));
                }
            }
        }
    }

    // greedy monotonicity and domination by the overlap bound
    for n in PROPERTY_SIZES {
        let trace = greedy_run(n, 6).unwrap();
        for ell in 1..=6 {
            if trace.probs[ell] < trace.probs[ell - 1] - 1e-12 {
                bad.push(format!("greedy monotone N={n} l={ell}"));
            }
            let ov = target_overlap(&trace.states[ell], ell).norm();
            if ov > overlap_bound(n, ell).unwrap() + 1e-12 {
                bad.push(format!("greedy bound N={n} l={ell}"));
            }
        }
    }

    // factorization round trip on Q built from random P
    for trial in 0..40 {
        let deg = 1 + trial % 8;
        let roots: Vec<Complex64> = (0..deg)
            .map(|_| {
                let r = if rng.gen_bool(0.5) {
                    rng.gen_range(0.2..0.9)
                } else {
                    rng.gen_range(1.1..3.0)
                };
                Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI))
            })
            .collect();
        let mut coeffs = invinsert::synth::roots::poly_from_roots(&roots);
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        coeffs.iter_mut().for_each(|c| *c /= norm);
        let p = Poly { coeffs };
        let q = LaurentPoly::from_poly(&p);
        match spectral_factor(&q) {
            Ok(f) => {
                let worst = (0..256)
                    .map(|i| {
                        let z = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / 256.0);
                        (f.eval(z).norm() - p.eval(z).norm()).abs()
                    })
                    .fold(0.0, f64::max);
                if worst > 1e-9 {
                    bad.push(format!("factor deg {deg}: {worst:.1e}"));
                }
            }
            Err(e) => bad.push(format!("factor deg {deg}: {e}")),
        }
    }

    // magnitude matching at every synthesized stage
    let mut cases: Vec<(usize, usize, BTreeMap<String, _>)> = vec![(2, 1, BTreeMap::new())];
    for n in [2, 3, 6] {
        cases.push((n, 2, BTreeMap::new()));
    }
    let found = search_free_series(52, 3, &SearchParams::default())
        .unwrap()
        .expect("n = 52 search");
    cases.push((52, 3, found.free));
    for (n, k, free) in &cases {
        let s = synthesize_exact(*n, *k, free).unwrap();
        for d in &s.stages {
            if d.magnitude_residual > 1e-8 {
                bad.push(format!("magnitude N={n} stage {}", d.stage));
            }
        }
    }

    (
        bad.is_empty(),
        format!(
            "norm, parity, translation, matrix elements (N<=32), greedy monotone/bound, factor round trip (40 random, deg<=8), magnitude matching ({} syntheses){}",
            cases.len(),
            fmt_bad(&bad)
        ),
    )
}

fn k1_exactness() -> (bool, String) {
    let feasible: Vec<usize> = (2..=64).filter(|&n| k1_feasible(n).unwrap()).collect();
    let s = synthesize_exact(2, 1, &BTreeMap::new()).expect("synthesis");
    (
        feasible == [2] && s.report.min_success >= 1.0 - 1e-12,
        format!(
            "feasible sizes {feasible:?}, (2,1) min success {:.15}",
            s.report.min_success
        ),
    )
}

fn main() {
    let mut gate = Gate { failures: 0 };
    let checks: [(u32, &str, fn() -> (bool, String)); 9] = [
        (1, "greedy table reproduction", table_reproduction),
        (2, "harmonic sum approximation", harmonic_approximation),
        (3, "two-query feasibility boundary", k2_boundary),
        (4, "N=6 exact synthesis", n6_synthesis),
        (
            5,
            "N=52 three-query search and synthesis",
            n52_three_queries,
        ),
        (6, "composition M=6 k=2 h=2", composition),
        (7, "rate constant", rate_constant),
        (8, "property suites", properties),
        (9, "one-query exactness", k1_exactness),
    ];
    for (id, name, check) in checks {
        let (ok, detail) = check();
        gate.record(id, name, ok, detail);
    }
    println!("{} of 9 criteria passed", 9 - gate.failures);
    if gate.failures > 0 {
        std::process::exit(1);
    }
}
