#![allow(dead_code)]

use coreset_core::{DivergenceKind, DivergenceSpec, Domain, Matrix, PointSet};
use proptest::prelude::*;

pub const MAX_DIM: usize = 4;

/// Box used to sample unbounded kinds.
pub const UNBOUNDED: (f64, f64) = (-10.0, 10.0);

pub fn sampling_box(spec: &DivergenceSpec) -> (f64, f64) {
    match spec.domain() {
        Domain::Box { low, high } => (low, high),
        Domain::Unbounded => UNBOUNDED,
    }
}

/// Maps fractions in `[0, 1]` onto the sampling box.
pub fn place(spec: &DivergenceSpec, frac: &[f64]) -> Vec<f64> {
    let (lo, hi) = sampling_box(spec);
    frac[..spec.dim()]
        .iter()
        .map(|f| (lo + f * (hi - lo)).clamp(lo, hi))
        .collect()
}

fn spd(dim: usize, entries: &[f64]) -> Matrix {
    // BᵀB + 0.1 I
    let mut rows = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = if i == j { 0.1 } else { 0.0 };
            for l in 0..dim {
                acc += entries[l * dim + i] * entries[l * dim + j];
            }
            rows[i][j] = acc;
        }
    }
    // exact symmetry
    for i in 0..dim {
        for j in 0..i {
            rows[i][j] = rows[j][i];
        }
    }
    Matrix::from_rows(&rows).unwrap()
}

/// Any valid spec of dimension 1 to `MAX_DIM`.
pub fn any_spec() -> impl Strategy<Value = DivergenceSpec> {
    (
        0..DivergenceKind::ALL.len(),
        1..=MAX_DIM,
        0.05f64..2.0,
        1.5f64..20.0,
        0.2f64..4.0,
        prop::collection::vec(-1.0f64..1.0, MAX_DIM * MAX_DIM),
        0.05f64..0.95,
    )
        .prop_map(|(kind, dim, low, ratio, alpha, entries, nu)| {
            use DivergenceKind::*;
            let kind = DivergenceKind::ALL[kind];
            let high = low * ratio;
            match kind {
                SquaredEuclidean => DivergenceSpec::squared_euclidean(dim),
                Mahalanobis => DivergenceSpec::mahalanobis(spd(dim, &entries)).unwrap(),
                RelativeEntropy => DivergenceSpec::relative_entropy(dim, low, high).unwrap(),
                ItakuraSaito => DivergenceSpec::itakura_saito(dim, low, high).unwrap(),
                Harmonic => DivergenceSpec::harmonic(dim, low, high, alpha).unwrap(),
                NormLike => DivergenceSpec::norm_like(dim, low, high, 2.0 + alpha).unwrap(),
                ExponentialLoss => {
                    DivergenceSpec::exponential_loss(dim, low.min(1.0), (low * ratio).min(5.0).max(low.min(1.0) * 1.5))
                        .unwrap()
                }
                Hellinger => DivergenceSpec::hellinger(dim, nu).unwrap(),
            }
        })
}

pub fn fractions() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, MAX_DIM)
}

/// A spec with `n` in-domain points.
pub fn spec_and_points(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = (DivergenceSpec, PointSet)> {
    (any_spec(), prop::collection::vec(fractions(), n)).prop_map(|(spec, fr)| {
        let rows: Vec<Vec<f64>> = fr.iter().map(|f| place(&spec, f)).collect();
        let ps = PointSet::from_rows(&rows).unwrap();
        (spec, ps)
    })
}
