mod common;

use common::spec_and_points;
use coreset_core::rng::{derive_seed, rng_from_seed};
use coreset_core::sampling::{sample_coreset, sensitivity_alpha, weighted_d2_sample};
use coreset_core::{
    best_bicriteria, build_coreset, build_coreset_detailed, cost_hard, d2_sample, seed_hard,
    sensitivities, uniform_subsample, DivergenceSpec, Error, HardModel, Metric, PointSet,
    WeightedPointSet,
};
use proptest::prelude::*;
use rand::Rng as _;

/// 100 points on a skewed 10x10 grid.
fn grid100() -> PointSet {
    let rows: Vec<[f64; 2]> = (0..100)
        .map(|i| [(i % 10) as f64 * 1.5 + (i / 10) as f64 * 0.1, ((i / 10) as f64).powi(2)])
        .collect();
    PointSet::from_rows(&rows).unwrap()
}

fn e2() -> Metric {
    Metric::euclidean(2)
}

/// Pearson χ² statistic of `counts` against a uniform expectation.
fn chi_square_uniform(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Upper 1% point of χ² with 9 degrees of freedom.
const CHI2_9_P01: f64 = 21.666;

#[test]
fn d2_sample_regression_fixture() {
    let s = d2_sample(&grid100(), 5, &e2(), 2024).unwrap();
    assert_eq!(s.indices, FIXTURE);
    assert_eq!(d2_sample(&grid100(), 5, &e2(), 2024).unwrap(), s);
}

// recorded with xoshiro256++ seeded via seed_from_u64(2024)
const FIXTURE: [usize; 5] = [52, 67, 20, 90, 84];

#[test]
fn k_equal_n_selects_every_point() {
    let ps = grid100().select(&(0..12).collect::<Vec<_>>());
    let s = d2_sample(&ps, 12, &e2(), 3).unwrap();
    let mut idx = s.indices.clone();
    idx.sort();
    assert_eq!(idx, (0..12).collect::<Vec<_>>());
    assert!(s.closest_sq_dist.iter().all(|d| *d == 0.0));
    assert!(!s.degenerate);
}

#[test]
fn invalid_k_rejected() {
    let ps = grid100();
    assert!(matches!(d2_sample(&ps, 0, &e2(), 0), Err(Error::TooFewPoints { .. })));
    assert!(matches!(d2_sample(&ps, 101, &e2(), 0), Err(Error::TooFewPoints { .. })));
    assert!(best_bicriteria(&ps, 2, &e2(), 0, 0).is_err());
}

#[test]
fn identical_points_trigger_the_degenerate_fallback() {
    let ps = PointSet::from_rows(&[[1.0, 1.0]; 6]).unwrap();
    let s = d2_sample(&ps, 3, &e2(), 9).unwrap();
    assert!(s.degenerate);
    let sol = best_bicriteria(&ps, 3, &e2(), 1, 9).unwrap();
    assert_eq!(sol.cost, 0.0);
    // every point ties, so all go to center 0
    assert_eq!(sol.cells[0].len(), 6);
    let table = sensitivities(&sol, 3).unwrap();
    assert!(table.zero_cost);
    assert!(table.p.iter().all(|p| (p - 1.0 / 6.0).abs() < 1e-15));
}

#[test]
fn first_center_is_uniform() {
    let ps = grid100().select(&(0..10).collect::<Vec<_>>());
    let ws = WeightedPointSet::unit(ps.clone());
    let se = DivergenceSpec::squared_euclidean(2);
    let mut plain = vec![0usize; 10];
    let mut seeded = vec![0usize; 10];
    for t in 0..1000 {
        plain[d2_sample(&ps, 1, &e2(), derive_seed(11, t)).unwrap().indices[0]] += 1;
        let m = seed_hard(&se, &ws, 1, derive_seed(12, t)).unwrap();
        let row = m.centers().row(0);
        seeded[ps.rows().position(|r| r == row).unwrap()] += 1;
    }
    assert!(chi_square_uniform(&plain) < CHI2_9_P01, "{plain:?}");
    assert!(chi_square_uniform(&seeded) < CHI2_9_P01, "{seeded:?}");
}

#[test]
fn weighted_first_center_follows_weights() {
    let ps = PointSet::from_rows(&[[0.0], [1.0]]).unwrap();
    let ws = WeightedPointSet::new(ps, vec![1.0, 3.0], 4).unwrap();
    let hits = (0..4000)
        .filter(|t| weighted_d2_sample(&ws, 1, &Metric::euclidean(1), *t).unwrap().indices[0] == 1)
        .count();
    // binomial(4000, 0.75): sd ≈ 27.4
    assert!((hits as f64 - 3000.0).abs() < 4.0 * 27.4, "{hits}");
}

#[test]
fn single_run_bicriteria_matches_d2_sample() {
    let ps = grid100();
    let sol = best_bicriteria(&ps, 4, &e2(), 1, 77).unwrap();
    let s = d2_sample(&ps, 4, &e2(), derive_seed(77, 0)).unwrap();
    assert_eq!(sol.center_indices, s.indices);
    assert_eq!(sol.closest_sq_dist, s.closest_sq_dist);
}

#[test]
fn boosting_never_hurts() {
    let ps = grid100();
    for seed in 0..20 {
        let one = best_bicriteria(&ps, 4, &e2(), 1, seed).unwrap();
        let many = best_bicriteria(&ps, 4, &e2(), 7, seed).unwrap();
        assert!(many.cost <= one.cost);
    }
}

#[test]
fn k1_sensitivities_by_hand() {
    // distances (0, 2), k = 1: c = 1, α = 32, Σ_cell d = 2, |B| = 2, n = 2
    // s = α d / c + 2α·2/2 + 4·2/2 = (0 + 64 + 4, 64 + 64 + 4)
    let ps = PointSet::from_rows(&[[0.0], [2f64.sqrt()]]).unwrap();
    let sol = best_bicriteria(&ps, 1, &Metric::euclidean(1), 1, 0).unwrap();
    let t = sensitivities(&sol, 1).unwrap();
    let expected = if sol.center_indices[0] == 0 { [68.0, 132.0] } else { [132.0, 68.0] };
    assert!((t.s[0] - expected[0]).abs() < 1e-12 && (t.s[1] - expected[1]).abs() < 1e-12);
    assert!((t.p[0] - expected[0] / 200.0).abs() < 1e-15);
    assert_eq!(t.alpha, 32.0);
    assert!((t.total - (3.0 * 32.0 + 4.0)).abs() < 1e-9);
}

#[test]
fn all_draws_on_one_point() {
    let ps = PointSet::from_rows(&[[3.0, 4.0]]).unwrap();
    let cs = build_coreset(&ps, 1, 5, &e2(), 1, 1).unwrap();
    assert_eq!(cs.len(), 1);
    assert_eq!(cs.weights(), &[1.0]);
    assert_eq!(cs.origin_n(), 1);
}

#[test]
fn expected_total_weight_is_n() {
    let mut rng = rng_from_seed(5);
    let rows: Vec<[f64; 2]> = (0..500)
        .map(|_| [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
        .collect();
    let ps = PointSet::from_rows(&rows).unwrap();
    let totals: Vec<f64> = (0..200)
        .map(|t| build_coreset(&ps, 3, 50, &e2(), 1, derive_seed(6, t)).unwrap().total_weight())
        .collect();
    let mean = totals.iter().sum::<f64>() / 200.0;
    let sd = (totals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
    let se = sd / 200f64.sqrt();
    assert!((mean - 500.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn fixed_bicriteria_estimates_are_unbiased() {
    let mut rng = rng_from_seed(8);
    let rows: Vec<[f64; 2]> = (0..300)
        .map(|i| {
            let c = [0.0, 20.0, 50.0][i % 3];
            [c + rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]
        })
        .collect();
    let ps = PointSet::from_rows(&rows).unwrap();
    let se_spec = DivergenceSpec::squared_euclidean(2);
    let query = HardModel::new(PointSet::from_rows(&[[1.0, 1.0], [30.0, 0.0], [45.0, -2.0]]).unwrap());
    let truth = cost_hard(&se_spec, &WeightedPointSet::unit(ps.clone()), &query).unwrap();
    let sol = best_bicriteria(&ps, 3, &e2(), 1, 9).unwrap();
    let table = sensitivities(&sol, 3).unwrap();
    let est: Vec<f64> = (0..500)
        .map(|t| {
            let cs = sample_coreset(&ps, &table, 30, derive_seed(10, t)).unwrap();
            cost_hard(&se_spec, &cs, &query).unwrap()
        })
        .collect();
    let mean = est.iter().sum::<f64>() / 500.0;
    let sd = (est.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 499.0).sqrt();
    assert!((mean - truth).abs() <= 4.0 * sd / 500f64.sqrt(), "mean {mean} truth {truth}");
}

#[test]
fn uniform_subsample_weights() {
    let ps = grid100();
    let us = uniform_subsample(&ps, 40, 3).unwrap();
    assert!((us.total_weight() - 100.0).abs() < 1e-12);
    assert!(us.weights().iter().all(|w| (w / 2.5).fract() == 0.0));
    assert_eq!(us.origin_n(), 100);
    assert_eq!(uniform_subsample(&ps, 40, 3).unwrap(), us);
    assert!(uniform_subsample(&ps, 0, 3).is_err());
    // m = n without collisions: unit weights
    let tiny = ps.select(&[0, 1]);
    let mut saw_unit = false;
    for seed in 0..20 {
        let s = uniform_subsample(&tiny, 2, seed).unwrap();
        if s.len() == 2 {
            assert_eq!(s.weights(), &[1.0, 1.0]);
            saw_unit = true;
        }
    }
    assert!(saw_unit);
}

#[test]
fn coreset_is_deterministic() {
    let ps = grid100();
    let a = build_coreset_detailed(&ps, 3, 30, &e2(), 2, 42).unwrap();
    let b = build_coreset_detailed(&ps, 3, 30, &e2(), 2, 42).unwrap();
    assert_eq!(a.set, b.set);
    assert_eq!(a.sensitivities, b.sensitivities);
    assert_eq!(a.set.origin_n(), 100);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bicriteria_and_sensitivity_invariants(
        (spec, ps) in spec_and_points(2..=60),
        k in 1usize..6,
        runs in 1usize..4,
        seed in any::<u64>(),
    ) {
        let k = k.min(ps.len());
        let sol = best_bicriteria(&ps, k, spec.metric(), runs, seed).unwrap();
        let n = ps.len();
        let mut seen = vec![false; n];
        for (j, cell) in sol.cells.iter().enumerate() {
            for &i in cell {
                prop_assert!(!seen[i]);
                seen[i] = true;
                prop_assert_eq!(sol.assignment[i], j);
            }
        }
        prop_assert!(seen.iter().all(|s| *s));
        let mean = sol.closest_sq_dist.iter().sum::<f64>() / n as f64;
        prop_assert!((sol.cost - mean).abs() <= 1e-12 * mean.max(1e-300));
        for &c in &sol.center_indices {
            prop_assert_eq!(sol.closest_sq_dist[c], 0.0);
        }

        let t = sensitivities(&sol, k).unwrap();
        let total: f64 = t.s.iter().sum();
        prop_assert!((t.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (s, p) in t.s.iter().zip(&t.p) {
            prop_assert!(*s > 0.0 && s.is_finite());
            prop_assert!((p - s / total).abs() <= 1e-12);
        }
        prop_assert_eq!(t.alpha, sensitivity_alpha(k));
        if k == 1 && !t.zero_cost {
            prop_assert!((t.total - (3.0 * t.alpha + 4.0)).abs() <= 1e-9 * t.total);
        }
    }

    #[test]
    fn coresets_are_valid_weighted_sets(
        (spec, ps) in spec_and_points(1..=40),
        k in 1usize..4,
        m in 1usize..80,
        seed in any::<u64>(),
    ) {
        let k = k.min(ps.len());
        let cs = build_coreset(&ps, k, m, spec.metric(), 1, seed).unwrap();
        prop_assert!(cs.len() <= m);
        prop_assert_eq!(cs.origin_n(), ps.len());
        prop_assert!(cs.weights().iter().all(|w| *w > 0.0 && w.is_finite()));
        cs.points().check_domain(&spec).unwrap();
    }
}
