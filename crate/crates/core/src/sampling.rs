//! Mahalanobis D²-sampling, sensitivity bounds and importance-sampled
//! coresets.
//!
//! Seeding runs in the whitened space `x ↦ U x` where `A = UᵀU`, so the
//! squared Mahalanobis distance becomes the squared Euclidean one. The
//! coreset sampler draws `m` points i.i.d. from the sensitivity
//! distribution `p` and gives each draw weight `1 / (m p(x))`; repeated
//! draws of the same point are merged by summing their weights.

use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;

use crate::divergence::Metric;
use crate::error::{Error, Result};
use crate::math::{log2, sq_euclidean};
use crate::points::{PointSet, WeightedPointSet};
use crate::rng::{derive_seed, rng_from_seed, Rng};

/// Indices of the chosen centers, in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct Seeding {
    pub indices: Vec<usize>,
    /// Set when every remaining point sat on a chosen center before `k`
    /// centers were picked; the rest were then drawn uniformly.
    pub degenerate: bool,
    /// `d_A(x, B)` for the final `B`.
    pub closest_sq_dist: Vec<f64>,
}

/// Row-major `U x` for every point.
pub fn whiten(ps: &PointSet, metric: &Metric) -> Result<Vec<f64>> {
    if metric.dim() != ps.dim() {
        return Err(Error::DimensionMismatch {
            expected: metric.dim(),
            found: ps.dim(),
        });
    }
    let d = ps.dim();
    let mut out = vec![0.0; ps.len() * d];
    for (row, dst) in ps.rows().zip(out.chunks_exact_mut(d)) {
        metric.whiten_into(row, dst);
    }
    Ok(out)
}

/// Mahalanobis D²-sampling: the first center is uniform over the points,
/// each further one is drawn with probability proportional to `d_A(x, B)`.
pub fn d2_sample(ps: &PointSet, k: usize, metric: &Metric, seed: u64) -> Result<Seeding> {
    check_k(k, ps.len())?;
    let white = whiten(ps, metric)?;
    let mut rng = rng_from_seed(seed);
    Ok(d2_whitened(&white, ps.dim(), None, k, &mut rng))
}

/// D²-sampling where both the uniform first draw and the distance-based
/// draws are scaled by point weights.
pub fn weighted_d2_sample(ws: &WeightedPointSet, k: usize, metric: &Metric, seed: u64) -> Result<Seeding> {
    check_k(k, ws.len())?;
    let white = whiten(ws.points(), metric)?;
    let mut rng = rng_from_seed(seed);
    Ok(d2_whitened(&white, ws.dim(), Some(ws.weights()), k, &mut rng))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::TooFewPoints { k, n });
    }
    Ok(())
}

fn draw(rng: &mut Rng, mass: impl Iterator<Item = f64>) -> Option<usize> {
    WeightedIndex::new(mass).ok().map(|w| w.sample(rng))
}

fn d2_whitened(white: &[f64], dim: usize, weights: Option<&[f64]>, k: usize, rng: &mut Rng) -> Seeding {
    let n = white.len() / dim;
    let row = |i: usize| &white[i * dim..(i + 1) * dim];
    let uniform = |rng: &mut Rng| match weights {
        None => rng.random_range(0..n),
        Some(w) => draw(rng, w.iter().copied()).expect("weights are positive"),
    };

    let first = uniform(rng);
    let mut indices = Vec::with_capacity(k);
    indices.push(first);
    let mut min_d: Vec<f64> = (0..n).map(|i| sq_euclidean(row(i), row(first))).collect();
    let mut degenerate = false;

    while indices.len() < k {
        let mass = min_d
            .iter()
            .enumerate()
            .map(|(i, &d)| weights.map_or(d, |w| w[i] * d));
        let next = match draw(rng, mass) {
            Some(i) => i,
            None => {
                degenerate = true;
                uniform(rng)
            }
        };
        indices.push(next);
        let c = row(next);
        for (i, d) in min_d.iter_mut().enumerate() {
            let nd = sq_euclidean(row(i), c);
            if nd < *d {
                *d = nd;
            }
        }
    }
    Seeding {
        indices,
        degenerate,
        closest_sq_dist: min_d,
    }
}

/// Rough `k`-center solution used to shape the sampling distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BicriteriaSolution {
    pub center_indices: Vec<usize>,
    pub centers: PointSet,
    /// Mean quantization error `(1/n) Σ d_A(x, B)`.
    pub cost: f64,
    /// Nearest center of each point; ties go to the lowest center index.
    pub assignment: Vec<usize>,
    /// Point indices per center.
    pub cells: Vec<Vec<usize>>,
    pub closest_sq_dist: Vec<f64>,
    pub degenerate: bool,
}

/// Runs D²-sampling `runs` times (sub-seeds `derive_seed(seed, r)`) and keeps
/// the centers with the smallest total `d_A` cost. Ties keep the earliest run.
pub fn best_bicriteria(
    ps: &PointSet,
    k: usize,
    metric: &Metric,
    runs: usize,
    seed: u64,
) -> Result<BicriteriaSolution> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    check_k(k, ps.len())?;
    let white = whiten(ps, metric)?;
    let dim = ps.dim();

    let mut best: Option<(f64, Seeding)> = None;
    for r in 0..runs {
        let mut rng = rng_from_seed(derive_seed(seed, r as u64));
        let s = d2_whitened(&white, dim, None, k, &mut rng);
        let total: f64 = s.closest_sq_dist.iter().sum();
        if best.as_ref().map_or(true, |(b, _)| total < *b) {
            best = Some((total, s));
        }
    }
    let (_, seeding) = best.expect("runs >= 1");
    Ok(partition(ps, &white, seeding))
}

fn partition(ps: &PointSet, white: &[f64], seeding: Seeding) -> BicriteriaSolution {
    let dim = ps.dim();
    let n = ps.len();
    let row = |i: usize| &white[i * dim..(i + 1) * dim];
    let k = seeding.indices.len();
    let mut assignment = vec![0; n];
    let mut closest = vec![0.0; n];
    let mut cells = vec![Vec::new(); k];
    for i in 0..n {
        let (mut bj, mut bd) = (0, f64::INFINITY);
        for (j, &c) in seeding.indices.iter().enumerate() {
            let d = sq_euclidean(row(i), row(c));
            if d < bd {
                bd = d;
                bj = j;
            }
        }
        assignment[i] = bj;
        closest[i] = bd;
        cells[bj].push(i);
    }
    let cost = closest.iter().sum::<f64>() / n as f64;
    BicriteriaSolution {
        centers: ps.select(&seeding.indices),
        center_indices: seeding.indices,
        cost,
        assignment,
        cells,
        closest_sq_dist: closest,
        degenerate: seeding.degenerate,
    }
}

/// Sensitivity upper bounds `s(x)` and the sampling distribution `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityTable {
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    /// `Σ s / n`.
    pub total: f64,
    pub alpha: f64,
    pub c_phi: f64,
    /// Set when the bicriteria cost was zero; the distance terms are then
    /// dropped and only the cell-size term remains.
    pub zero_cost: bool,
}

/// `α = 16 (log₂ k + 2)`.
pub fn sensitivity_alpha(k: usize) -> f64 {
    16.0 * (log2(k as f64) + 2.0)
}

/// Computes
/// `s(x) = α d_A(x,B)/c + 2α Σ_{x'∈B_i} d_A(x',B) / (|B_i| c) + 4n/|B_i|`
/// for every point, where `B_i` is the cell of `x` and `c` the mean
/// bicriteria cost.
pub fn sensitivities(sol: &BicriteriaSolution, k: usize) -> Result<SensitivityTable> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let n = sol.assignment.len();
    let alpha = sensitivity_alpha(k);
    let c = sol.cost;
    let zero_cost = !(c > 0.0);
    let mut s = vec![0.0; n];
    for cell in sol.cells.iter().filter(|c| !c.is_empty()) {
        let size = cell.len() as f64;
        let size_term = 4.0 * n as f64 / size;
        let cell_sum: f64 = cell.iter().map(|&i| sol.closest_sq_dist[i]).sum();
        for &i in cell {
            s[i] = if zero_cost {
                size_term
            } else {
                alpha * sol.closest_sq_dist[i] / c + 2.0 * alpha * cell_sum / (size * c) + size_term
            };
        }
    }
    let sum: f64 = s.iter().sum();
    let p = s.iter().map(|v| v / sum).collect();
    Ok(SensitivityTable {
        total: sum / n as f64,
        s,
        p,
        alpha,
        c_phi: c,
        zero_cost,
    })
}

/// Draws `m` indices i.i.d. from `table.p` and returns the merged weighted
/// sample, ordered by point index.
pub fn sample_coreset(ps: &PointSet, table: &SensitivityTable, m: usize, seed: u64) -> Result<WeightedPointSet> {
    if m == 0 {
        return Err(Error::InvalidParameter("coreset size must be at least 1".into()));
    }
    if table.p.len() != ps.len() {
        return Err(Error::DimensionMismatch {
            expected: ps.len(),
            found: table.p.len(),
        });
    }
    let dist = WeightedIndex::new(table.p.iter().copied())
        .map_err(|e| Error::InvalidParameter(alloc::format!("sampling distribution: {e}")))?;
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u32; ps.len()];
    for _ in 0..m {
        counts[dist.sample(&mut rng)] += 1;
    }
    let mut idx = Vec::new();
    let mut weights = Vec::new();
    for (i, &c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
        idx.push(i);
        weights.push(c as f64 / (m as f64 * table.p[i]));
    }
    WeightedPointSet::new(ps.select(&idx), weights, ps.len())
}

/// A coreset together with the intermediate quantities that produced it.
#[derive(Debug, Clone)]
pub struct Coreset {
    pub set: WeightedPointSet,
    pub bicriteria: BicriteriaSolution,
    pub sensitivities: SensitivityTable,
}

/// Sensitivity-sampled coreset of size `m` (before merging duplicates).
///
/// The bicriteria solution uses sub-seed `derive_seed(seed, 0)` and the
/// sampling step `derive_seed(seed, 1)`.
pub fn build_coreset_detailed(
    ps: &PointSet,
    k: usize,
    m: usize,
    metric: &Metric,
    runs: usize,
    seed: u64,
) -> Result<Coreset> {
    let bicriteria = best_bicriteria(ps, k, metric, runs, derive_seed(seed, 0))?;
    let sensitivities = sensitivities(&bicriteria, k)?;
    let set = sample_coreset(ps, &sensitivities, m, derive_seed(seed, 1))?;
    Ok(Coreset {
        set,
        bicriteria,
        sensitivities,
    })
}

pub fn build_coreset(
    ps: &PointSet,
    k: usize,
    m: usize,
    metric: &Metric,
    runs: usize,
    seed: u64,
) -> Result<WeightedPointSet> {
    build_coreset_detailed(ps, k, m, metric, runs, seed).map(|c| c.set)
}

/// `m` uniform draws with replacement, each of weight `n / m`, merged by
/// index.
pub fn uniform_subsample(ps: &PointSet, m: usize, seed: u64) -> Result<WeightedPointSet> {
    if m == 0 {
        return Err(Error::InvalidParameter("subsample size must be at least 1".into()));
    }
    let n = ps.len();
    let mut rng = rng_from_seed(seed);
    let mut counts = vec![0u32; n];
    for _ in 0..m {
        counts[rng.random_range(0..n)] += 1;
    }
    let unit = n as f64 / m as f64;
    let mut idx = Vec::new();
    let mut weights = Vec::new();
    for (i, &c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
        idx.push(i);
        weights.push(c as f64 * unit);
    }
    WeightedPointSet::new(ps.select(&idx), weights, n)
}
