#![allow(dead_code)]

use coreset_core::rng::{rng_from_seed, Rng};
use coreset_core::{DivergenceKind, DivergenceSpec, Domain, Matrix, PointSet};
use rand::Rng as _;

/// Sampling box for unbounded domains.
pub const UNBOUNDED_BOX: (f64, f64) = (-10.0, 10.0);

pub fn mahalanobis_3() -> Matrix {
    Matrix::from_rows(&[[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 1.5]]).unwrap()
}

/// One spec per kind in dimension `dim` (Mahalanobis is always 3-d).
pub fn spec_for(kind: DivergenceKind, dim: usize) -> DivergenceSpec {
    use DivergenceKind::*;
    match kind {
        SquaredEuclidean => DivergenceSpec::squared_euclidean(dim),
        Mahalanobis => DivergenceSpec::mahalanobis(mahalanobis_3()).unwrap(),
        RelativeEntropy => DivergenceSpec::relative_entropy(dim, 0.1, 10.0).unwrap(),
        ItakuraSaito => DivergenceSpec::itakura_saito(dim, 0.2, 5.0).unwrap(),
        Harmonic => DivergenceSpec::harmonic(dim, 0.5, 4.0, 1.5).unwrap(),
        NormLike => DivergenceSpec::norm_like(dim, 0.5, 4.0, 3.0).unwrap(),
        ExponentialLoss => DivergenceSpec::exponential_loss(dim, 0.1, 2.0).unwrap(),
        Hellinger => DivergenceSpec::hellinger(dim, 0.8).unwrap(),
    }
}

pub fn all_specs(dim: usize) -> Vec<DivergenceSpec> {
    DivergenceKind::ALL.iter().map(|k| spec_for(*k, dim)).collect()
}

pub fn sampling_box(spec: &DivergenceSpec) -> (f64, f64) {
    match spec.domain() {
        Domain::Box { low, high } => (low, high),
        Domain::Unbounded => UNBOUNDED_BOX,
    }
}

pub fn random_point(spec: &DivergenceSpec, rng: &mut Rng) -> Vec<f64> {
    let (lo, hi) = sampling_box(spec);
    (0..spec.dim()).map(|_| rng.random_range(lo..=hi)).collect()
}

pub fn random_points(spec: &DivergenceSpec, n: usize, seed: u64) -> PointSet {
    let mut rng = rng_from_seed(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_point(spec, &mut rng)).collect();
    PointSet::from_rows(&rows).unwrap()
}

/// Points scattered around `k` random in-domain centers, clamped to the box.
pub fn clustered_points(spec: &DivergenceSpec, n: usize, k: usize, spread: f64, seed: u64) -> PointSet {
    let mut rng = rng_from_seed(seed);
    let (lo, hi) = sampling_box(spec);
    let centers: Vec<Vec<f64>> = (0..k).map(|_| random_point(spec, &mut rng)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            centers[i % k]
                .iter()
                .map(|c| {
                    let v = c + spread * (hi - lo) * (rng.random::<f64>() - 0.5);
                    v.clamp(lo, hi)
                })
                .collect()
        })
        .collect();
    PointSet::from_rows(&rows).unwrap()
}
