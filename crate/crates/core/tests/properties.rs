use std::f64::consts::PI;

use invinsert::bounds::overlap_bound;
use invinsert::compose::{compose_solve, reduced_oracle};
use invinsert::greedy::{greedy_run, target_overlap};
use invinsert::hilbert::{
    oracle_momentum_element, run_with_oracle, to_momentum, to_position, translate, uniform_start,
};
use invinsert::synth::roots::poly_from_roots;
use invinsert::synth::{spectral_factor, synthesize_exact, LaurentPoly, Poly};
use invinsert::{Basis, Complex64, Oracle, PhaseSchedule, StateVector};
use proptest::prelude::*;

const SIZES: [usize; 6] = [2, 3, 6, 8, 16, 52];

fn size() -> impl Strategy<Value = usize> {
    prop::sample::select(SIZES.to_vec())
}

fn state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * n).prop_filter_map(
        "nonzero",
        move |v| {
            let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| {
                StateVector::new(n, Basis::Position, amps.iter().map(|a| a / norm).collect())
                    .unwrap()
            })
        },
    )
}

fn schedule(n: usize, k: usize) -> impl Strategy<Value = PhaseSchedule> {
    prop::collection::vec(prop::collection::vec(0.0..2.0 * PI, 2 * n), k)
        .prop_map(move |stages| PhaseSchedule::new(n, stages).unwrap())
}

fn gap(a: &StateVector, b: &StateVector) -> f64 {
    let b = b.in_basis(a.basis());
    a.amps()
        .iter()
        .zip(b.amps())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_change_is_unitary(psi in size().prop_flat_map(state)) {
        let m = to_momentum(&psi);
        prop_assert!((m.norm() - 1.0).abs() < 1e-12);
        prop_assert!(gap(&to_position(&m), &psi) < 1e-12);
    }

    #[test]
    fn oracle_and_translation_preserve_norm(
        (n, psi, j, t) in size().prop_flat_map(|n| (Just(n), state(n), 0..n, -200i64..200))
    ) {
        let f = Oracle::insertion(n, j).unwrap().apply(&psi);
        prop_assert!((f.norm() - 1.0).abs() < 1e-12);
        let moved = translate(&to_momentum(&psi), t);
        prop_assert!(gap(&moved, &translate(&psi, t)) < 1e-12);
    }

    #[test]
    fn oracle_is_conjugated_translate(
        (n, psi, j) in size().prop_flat_map(|n| (Just(n), state(n), 0..n))
    ) {
        // F_j = T^j F_0 T^-j
        let direct = Oracle::insertion(n, j).unwrap().apply(&psi);
        let via = translate(&Oracle::insertion(n, 0).unwrap().apply(&translate(&psi, -(j as i64))), j as i64);
        prop_assert!(gap(&direct, &via) < 1e-12);
    }

    #[test]
    fn invariant_runs_are_translation_covariant(
        (n, sched) in size().prop_flat_map(|n| (Just(n), (1usize..5).prop_flat_map(move |k| schedule(n, k))))
    ) {
        let base = run_with_oracle(&sched, &Oracle::insertion(n, 0).unwrap()).unwrap();
        for j in 0..n {
            let fin = run_with_oracle(&sched, &Oracle::insertion(n, j).unwrap()).unwrap();
            prop_assert!(gap(&fin, &translate(&base, j as i64)) < 1e-12);
        }
    }

    #[test]
    fn stages_alternate_parity(
        (n, sched, j) in size().prop_flat_map(|n| (Just(n), schedule(n, 4), 0..n))
    ) {
        let oracle = Oracle::insertion(n, j).unwrap();
        let mut s = uniform_start(n).unwrap();
        for stage in 1..=4 {
            s = sched.apply_stage(stage, &oracle.apply(&s));
            prop_assert!(s.parity_leak(1 - stage % 2) < 1e-12);
            prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_element_matches_position_sum(n in 2usize..=32, p in 0usize..64, q in 0usize..64) {
        let dim = 2 * n;
        let (p, q) = (p % dim, q % dim);
        let direct: Complex64 = (0..dim)
            .map(|x| {
                let f = if x < n { 1.0 } else { -1.0 };
                Complex64::from_polar(f, PI * ((q as f64 - p as f64) * x as f64) / n as f64)
            })
            .sum::<Complex64>()
            / dim as f64;
        prop_assert!((direct - oracle_momentum_element(p, q, n)).norm() < 1e-12);
    }

    #[test]
    fn factorization_round_trip(
        roots in prop::collection::vec((0.15f64..0.9, any::<bool>(), 0.0..2.0 * PI), 1..=8)
    ) {
        let r: Vec<Complex64> = roots
            .iter()
            .map(|&(m, outside, a)| Complex64::from_polar(if outside { 1.0 / m } else { m }, a))
            .collect();
        let mut coeffs = poly_from_roots(&r);
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        coeffs.iter_mut().for_each(|c| *c /= norm);
        let p = Poly { coeffs };
        let f = spectral_factor(&LaurentPoly::from_poly(&p)).unwrap();
        for i in 0..128 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / 128.0);
            prop_assert!((f.eval(z).norm() - p.eval(z).norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn reduced_answer_is_block_index(m in 2usize..10, h in 1u32..4, seed in any::<u64>()) {
        let n = m.pow(h);
        let j = (seed % n as u64) as usize;
        let mut base = 0;
        for level in (1..=h).rev() {
            let scale = m.pow(level - 1);
            let o = reduced_oracle(j, base, scale, m).unwrap();
            let answer = (j - base) / scale;
            prop_assert_eq!(o, Oracle::insertion(m, answer).unwrap());
            base += answer * scale;
        }
        prop_assert_eq!(base, j);
    }
}

#[test]
fn greedy_monotone_and_bounded() {
    for n in SIZES.iter().copied().chain([64, 256, 1024]) {
        let trace = greedy_run(n, 6).unwrap();
        for ell in 1..=6 {
            assert!(trace.probs[ell] >= trace.probs[ell - 1] - 1e-12);
            let ov = target_overlap(&trace.states[ell], ell).norm();
            assert!(
                ov <= overlap_bound(n, ell).unwrap() + 1e-12,
                "n = {n}, l = {ell}"
            );
        }
    }
}

#[test]
fn greedy_schedule_reproduces_recursion() {
    for n in [6, 16, 64] {
        let trace = greedy_run(n, 4).unwrap();
        for j in 0..n {
            let p = invinsert::hilbert::run_schedule(&trace.schedule, j)
                .unwrap()
                .success_prob;
            assert!((p - trace.probs[4]).abs() < 1e-10);
        }
    }
}

#[test]
fn synthesized_stages_match_magnitudes() {
    for n in 2..=6 {
        let s = synthesize_exact(n, 2, &Default::default()).unwrap();
        assert!(s
            .stages
            .iter()
            .all(|d| d.magnitude_residual < 1e-8 && d.factor_residual < 1e-8));
        assert!(s.report.min_success >= 1.0 - 1e-8);
        assert!(s.report.translation_defect < 1e-10);
    }
}

#[test]
fn every_small_composition_is_exact() {
    let s6 = synthesize_exact(6, 2, &Default::default())
        .unwrap()
        .schedule;
    let s3 = synthesize_exact(3, 2, &Default::default())
        .unwrap()
        .schedule;
    for (m, s, h) in [(6usize, &s6, 3u32), (3, &s3, 5)] {
        for j in 0..m.pow(h) {
            let r = compose_solve(m, 2, h, s, j).unwrap();
            assert_eq!((r.found_j, r.queries_used), (j, 2 * h as usize));
        }
    }
}
