//! Exhaustive hard-clustering optimum on small weighted sets, the
//! coreset-based approximation scheme built on it, and the relative-error
//! metric used by the experiments.

use alloc::vec;
use alloc::vec::Vec;

use crate::clustering::{cost_hard, HardModel};
use crate::divergence::DivergenceSpec;
use crate::error::{Error, Result};
use crate::points::{PointSet, WeightedPointSet};
use crate::sampling::build_coreset;

/// Largest number of partitions [`exhaustive_hard_optimum`] will enumerate.
pub const PARTITION_LIMIT: u128 = 10_000_000;

/// `Σ_{j=1}^{min(k,m)} S(m, j)`, the number of partitions of `m` items into
/// at most `k` non-empty blocks, saturating at `u128::MAX`.
pub fn partition_count(m: usize, k: usize) -> u128 {
    let k = k.min(m);
    // stirling[j] = S(i, j) for the current i
    let mut stirling = vec![0u128; k + 1];
    stirling[0] = 1;
    for _ in 0..m {
        for j in (1..=k).rev() {
            stirling[j] = (j as u128)
                .saturating_mul(stirling[j])
                .saturating_add(stirling[j - 1]);
        }
        stirling[0] = 0;
    }
    stirling[1..].iter().fold(0u128, |a, b| a.saturating_add(*b))
}

/// Optimal hard clustering found by enumerating every partition into at most
/// `k` blocks, each block represented by its weighted mean.
///
/// Points with identical coordinates are merged first; some optimal
/// clustering always keeps them together. Returns exactly `k` centers (when
/// `k` exceeds the number of distinct points the last center is repeated)
/// and the normalized hard cost.
pub fn exhaustive_hard_optimum(
    spec: &DivergenceSpec,
    ws: &WeightedPointSet,
    k: usize,
) -> Result<(HardModel, f64)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    ws.points().check_domain(spec)?;
    let merged = ws.merge_duplicates();
    let m = merged.len();
    let d = merged.dim();

    if k >= m {
        let mut data = merged.points().as_slice().to_vec();
        let last = merged.points().row(m - 1).to_vec();
        for _ in m..k {
            data.extend_from_slice(&last);
        }
        let model = HardModel::new(PointSet::new(d, data)?);
        let cost = cost_hard(spec, ws, &model)?;
        return Ok((model, cost));
    }

    let count = partition_count(m, k);
    if count > PARTITION_LIMIT {
        return Err(Error::PartitionLimit {
            partitions: count,
            limit: PARTITION_LIMIT,
        });
    }

    let pts = merged.points();
    let u = merged.weights();
    // Restricted growth strings: label[0] = 0 and
    // label[i] <= 1 + max(label[..i]), capped at k - 1.
    let mut label = vec![0usize; m];
    let mut prefix_max = vec![0usize; m];
    let mut sums = vec![0.0; k * d];
    let mut mass = vec![0.0; k];
    let mut means = vec![0.0; k * d];
    let mut best_cost = f64::INFINITY;
    let mut best_means: Vec<f64> = Vec::new();
    let mut best_blocks = 0;

    loop {
        let blocks = prefix_max[m - 1] + 1;
        sums[..blocks * d].iter_mut().for_each(|v| *v = 0.0);
        mass[..blocks].iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let b = label[i];
            mass[b] += u[i];
            for (s, x) in sums[b * d..(b + 1) * d].iter_mut().zip(pts.row(i)) {
                *s += u[i] * x;
            }
        }
        for b in 0..blocks {
            for t in 0..d {
                means[b * d + t] = sums[b * d + t] / mass[b];
            }
            let domain = spec.domain();
            means[b * d..(b + 1) * d].iter_mut().for_each(|v| *v = domain.clamp(*v));
        }
        let mut cost = 0.0;
        for i in 0..m {
            let b = label[i];
            cost += u[i] * spec.divergence_unchecked(pts.row(i), &means[b * d..(b + 1) * d]);
            if cost >= best_cost {
                break;
            }
        }
        if cost < best_cost {
            best_cost = cost;
            best_means = means[..blocks * d].to_vec();
            best_blocks = blocks;
        }

        // next restricted growth string
        let mut i = m - 1;
        loop {
            if i == 0 {
                return finish(spec, ws, d, k, best_means, best_blocks);
            }
            let cap = (prefix_max[i - 1] + 1).min(k - 1);
            if label[i] < cap {
                label[i] += 1;
                prefix_max[i] = prefix_max[i - 1].max(label[i]);
                for j in (i + 1)..m {
                    label[j] = 0;
                    prefix_max[j] = prefix_max[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

fn finish(
    spec: &DivergenceSpec,
    ws: &WeightedPointSet,
    d: usize,
    k: usize,
    mut means: Vec<f64>,
    blocks: usize,
) -> Result<(HardModel, f64)> {
    let last = means[(blocks - 1) * d..blocks * d].to_vec();
    for _ in blocks..k {
        means.extend_from_slice(&last);
    }
    let model = HardModel::new(PointSet::new(d, means)?);
    let cost = cost_hard(spec, ws, &model)?;
    Ok((model, cost))
}

/// Output of [`ptas`].
#[derive(Debug, Clone, PartialEq)]
pub struct PtasOutcome {
    pub model: HardModel,
    /// Number of distinct weighted points that were enumerated.
    pub coreset_len: usize,
    /// The accuracy the coreset size was chosen for; recorded, not enforced.
    pub eps: f64,
}

/// Coreset-then-enumerate approximation scheme.
///
/// Builds a sensitivity-sampled coreset of `m` draws and returns the best
/// partition of it. When `m ≥ n` the data set itself is used as the
/// (exact) coreset.
pub fn ptas(
    spec: &DivergenceSpec,
    ps: &PointSet,
    k: usize,
    eps: f64,
    m: usize,
    seed: u64,
) -> Result<PtasOutcome> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    ps.check_domain(spec)?;
    let summary = if m >= ps.len() {
        WeightedPointSet::unit(ps.clone())
    } else {
        build_coreset(ps, k.min(ps.len()), m, spec.metric(), 1, seed)?
    };
    let summary = summary.merge_duplicates();
    let (model, _) = exhaustive_hard_optimum(spec, &summary, k)?;
    Ok(PtasOutcome {
        model,
        coreset_len: summary.len(),
        eps,
    })
}

/// `(c_ss − c_full) / c_full`.
pub fn relative_error(c_ss: f64, c_full: f64) -> Result<f64> {
    if !(c_full > 0.0) {
        return Err(Error::NonPositiveReference(c_full));
    }
    Ok((c_ss - c_full) / c_full)
}
