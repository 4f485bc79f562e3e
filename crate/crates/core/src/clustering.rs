//! Weighted Bregman hard clustering (Lloyd) and soft clustering (EM).
//!
//! For a weighted set with weights `u` summarizing `origin_n` points:
//!
//! * hard cost: `(1 / origin_n) Σ u_c min_j d_φ(c, θ_j)`
//! * soft cost: `Σ u_c · [−ln Σ_j w_j exp(−d_φ(c, θ_j))]`
//!
//! Soft-clustering arithmetic is done in the log domain throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::divergence::DivergenceSpec;
use crate::error::{Error, Result};
use crate::math::{exp, ln, log_sum_exp};
use crate::points::{PointSet, WeightedPointSet};
use crate::sampling::weighted_d2_sample;

/// `k` cluster centers.
#[derive(Debug, Clone, PartialEq)]
pub struct HardModel {
    centers: PointSet,
}

impl HardModel {
    pub fn new(centers: PointSet) -> Self {
        Self { centers }
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }
}

/// Mixture weights and centers. Weights are kept as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftModel {
    log_weights: Vec<f64>,
    centers: PointSet,
}

impl SoftModel {
    /// Weights must be positive and sum to one within `1e-9`; they are
    /// renormalized exactly.
    pub fn new(weights: &[f64], centers: PointSet) -> Result<Self> {
        if weights.len() != centers.len() {
            return Err(Error::DimensionMismatch {
                expected: centers.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter("mixture weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(alloc::format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let log_total = ln(total);
        Ok(Self {
            log_weights: weights.iter().map(|w| ln(*w) - log_total).collect(),
            centers,
        })
    }

    /// Uniform weights `1/k`.
    pub fn uniform(centers: PointSet) -> Self {
        let k = centers.len();
        Self {
            log_weights: vec![-ln(k as f64); k],
            centers,
        }
    }

    pub fn k(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| exp(*l)).collect()
    }
}

/// Iteration log of a fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitReport {
    /// Number of update steps performed.
    pub iterations: usize,
    /// Objective before the first update and after every update.
    pub cost_trace: Vec<f64>,
    pub converged: bool,
    pub reseed_events: usize,
    /// Positions in `cost_trace` produced by an update that re-seeded a
    /// cluster; descent is not guaranteed across them.
    pub reseed_steps: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Stop once the relative cost decrease falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

fn check_model_centers(spec: &DivergenceSpec, ws: &WeightedPointSet, centers: &PointSet) -> Result<()> {
    ws.points().check_domain(spec)?;
    centers.check_domain(spec)
}

/// Index and divergence of the nearest center; ties go to the lowest index.
#[inline]
fn nearest(spec: &DivergenceSpec, x: &[f64], centers: &PointSet) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.rows().enumerate() {
        let d = spec.divergence_unchecked(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Normalized hard clustering cost of `ws` under `model`.
pub fn cost_hard(spec: &DivergenceSpec, ws: &WeightedPointSet, model: &HardModel) -> Result<f64> {
    check_model_centers(spec, ws, model.centers())?;
    Ok(hard_sum(spec, ws, model.centers()) / ws.origin_n() as f64)
}

fn hard_sum(spec: &DivergenceSpec, ws: &WeightedPointSet, centers: &PointSet) -> f64 {
    ws.points()
        .rows()
        .zip(ws.weights())
        .map(|(x, u)| u * nearest(spec, x, centers).1)
        .sum()
}

/// `−ln Σ_j w_j exp(−d_φ(x, θ_j))` for a single validated point.
fn soft_point(spec: &DivergenceSpec, x: &[f64], model: &SoftModel, scratch: &mut [f64]) -> f64 {
    for ((s, c), lw) in scratch.iter_mut().zip(model.centers.rows()).zip(&model.log_weights) {
        *s = lw - spec.divergence_unchecked(x, c);
    }
    -log_sum_exp(scratch)
}

/// Per-point soft cost `f_φ(x | Q)`.
pub fn point_soft_cost(spec: &DivergenceSpec, x: &[f64], model: &SoftModel) -> Result<f64> {
    spec.check_point(x)?;
    model.centers.check_domain(spec)?;
    let mut scratch = vec![0.0; model.k()];
    Ok(soft_point(spec, x, model, &mut scratch))
}

/// Weighted soft clustering cost (not normalized).
pub fn cost_soft(spec: &DivergenceSpec, ws: &WeightedPointSet, model: &SoftModel) -> Result<f64> {
    check_model_centers(spec, ws, model.centers())?;
    let mut scratch = vec![0.0; model.k()];
    Ok(ws
        .points()
        .rows()
        .zip(ws.weights())
        .map(|(x, u)| u * soft_point(spec, x, model, &mut scratch))
        .sum())
}

fn softmax_into(logits: &mut [f64]) -> f64 {
    let lse = log_sum_exp(logits);
    let mut sum = 0.0;
    for l in logits.iter_mut() {
        *l = exp(*l - lse);
        sum += *l;
    }
    for l in logits.iter_mut() {
        *l /= sum;
    }
    -lse
}

/// Posterior membership probabilities of `x` under `model`.
pub fn responsibilities(spec: &DivergenceSpec, x: &[f64], model: &SoftModel) -> Result<Vec<f64>> {
    spec.check_point(x)?;
    model.centers.check_domain(spec)?;
    let mut logits: Vec<f64> = model
        .centers
        .rows()
        .zip(&model.log_weights)
        .map(|(c, lw)| lw - spec.divergence_unchecked(x, c))
        .collect();
    softmax_into(&mut logits);
    Ok(logits)
}

fn clamp_row(spec: &DivergenceSpec, row: &mut [f64]) {
    let domain = spec.domain();
    row.iter_mut().for_each(|v| *v = domain.clamp(*v));
}

/// Bregman hard clustering from `init`.
///
/// Alternates nearest-center assignment and weighted-mean updates. An
/// empty cluster is moved onto the point with the largest current
/// divergence to its center.
pub fn lloyd_bregman(
    spec: &DivergenceSpec,
    ws: &WeightedPointSet,
    init: &HardModel,
    opts: FitOptions,
) -> Result<(HardModel, FitReport)> {
    check_model_centers(spec, ws, init.centers())?;
    let n = ws.len();
    let k = init.k();
    let d = ws.dim();
    let norm = ws.origin_n() as f64;
    let pts = ws.points();
    let u = ws.weights();

    let mut centers = init.centers().as_slice().to_vec();
    let mut assignment = vec![0usize; n];
    let mut dist = vec![0.0; n];

    let assign = |centers: &[f64], assignment: &mut [usize], dist: &mut [f64]| -> (f64, bool) {
        let cs = PointSet::new(d, centers.to_vec()).expect("centers stay finite");
        let mut changed = false;
        let mut total = 0.0;
        for i in 0..n {
            let (j, dv) = nearest(spec, pts.row(i), &cs);
            if assignment[i] != j {
                changed = true;
            }
            assignment[i] = j;
            dist[i] = dv;
            total += u[i] * dv;
        }
        (total / norm, changed)
    };

    let mut report = FitReport::default();
    let (mut cost, _) = assign(&centers, &mut assignment, &mut dist);
    report.cost_trace.push(cost);
    if cost == 0.0 {
        report.converged = true;
    }

    while !report.converged && report.iterations < opts.max_iter {
        let mut sums = vec![0.0; k * d];
        let mut mass = vec![0.0; k];
        for i in 0..n {
            let j = assignment[i];
            mass[j] += u[i];
            for (s, x) in sums[j * d..(j + 1) * d].iter_mut().zip(pts.row(i)) {
                *s += u[i] * x;
            }
        }
        let mut reseeded = false;
        for j in 0..k {
            let row = &mut centers[j * d..(j + 1) * d];
            if mass[j] > 0.0 {
                for (c, s) in row.iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                    *c = s / mass[j];
                }
                clamp_row(spec, row);
            }
        }
        for j in (0..k).filter(|&j| mass[j] == 0.0) {
            let far = (0..n)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                })
                .expect("non-empty set");
            centers[j * d..(j + 1) * d].copy_from_slice(pts.row(far));
            dist[far] = 0.0;
            reseeded = true;
            report.reseed_events += 1;
        }

        let (new_cost, changed) = assign(&centers, &mut assignment, &mut dist);
        report.iterations += 1;
        report.cost_trace.push(new_cost);
        if reseeded {
            report.reseed_steps.push(report.cost_trace.len() - 1);
        }
        let done = !reseeded && (!changed || cost - new_cost <= opts.tol * cost || new_cost == 0.0);
        cost = new_cost;
        if done {
            report.converged = true;
        }
    }

    Ok((HardModel::new(PointSet::new(d, centers)?), report))
}

struct EStep {
    /// `n × k` responsibilities.
    resp: Vec<f64>,
    /// Per-point soft cost.
    point_cost: Vec<f64>,
    cost: f64,
}

fn e_step(spec: &DivergenceSpec, ws: &WeightedPointSet, model: &SoftModel) -> EStep {
    let k = model.k();
    let n = ws.len();
    let mut resp = vec![0.0; n * k];
    let mut point_cost = vec![0.0; n];
    let mut cost = 0.0;
    for (i, (x, u)) in ws.points().rows().zip(ws.weights()).enumerate() {
        let row = &mut resp[i * k..(i + 1) * k];
        for ((r, c), lw) in row.iter_mut().zip(model.centers.rows()).zip(&model.log_weights) {
            *r = lw - spec.divergence_unchecked(x, c);
        }
        let f = softmax_into(row);
        point_cost[i] = f;
        cost += u * f;
    }
    EStep {
        resp,
        point_cost,
        cost,
    }
}

/// Mixture components whose responsibility mass drops below this fraction
/// of the total weight are re-seeded.
pub const DYING_COMPONENT_MASS: f64 = 1e-12;
/// Weight floor applied to a re-seeded component before renormalizing.
pub const RESEED_WEIGHT_FLOOR: f64 = 1e-6;

/// Bregman soft clustering (EM) from `init`.
pub fn em_bregman(
    spec: &DivergenceSpec,
    ws: &WeightedPointSet,
    init: &SoftModel,
    opts: FitOptions,
) -> Result<(SoftModel, FitReport)> {
    check_model_centers(spec, ws, init.centers())?;
    let k = init.k();
    let d = ws.dim();
    let n = ws.len();
    let total_w = ws.total_weight();
    let pts = ws.points();
    let u = ws.weights();

    let mut model = init.clone();
    let mut report = FitReport::default();
    let mut e = e_step(spec, ws, &model);
    report.cost_trace.push(e.cost);
    if e.cost == 0.0 {
        report.converged = true;
    }

    while !report.converged && report.iterations < opts.max_iter {
        let mut mass = vec![0.0; k];
        let mut sums = vec![0.0; k * d];
        for i in 0..n {
            let x = pts.row(i);
            for j in 0..k {
                let r = u[i] * e.resp[i * k + j];
                mass[j] += r;
                for (s, v) in sums[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *s += r * v;
                }
            }
        }
        let mut centers = model.centers.as_slice().to_vec();
        let mut weights = vec![0.0; k];
        let mut dying = Vec::new();
        for j in 0..k {
            if mass[j] < DYING_COMPONENT_MASS * total_w {
                dying.push(j);
                weights[j] = mass[j] / total_w;
                continue;
            }
            let row = &mut centers[j * d..(j + 1) * d];
            for (c, s) in row.iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                *c = s / mass[j];
            }
            clamp_row(spec, row);
            weights[j] = mass[j] / total_w;
        }
        let mut taken: Vec<usize> = Vec::new();
        for &j in &dying {
            let far = (0..n)
                .filter(|i| !taken.contains(i))
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if e.point_cost[b] >= e.point_cost[i] => Some(b),
                    _ => Some(i),
                })
                .unwrap_or(0);
            taken.push(far);
            centers[j * d..(j + 1) * d].copy_from_slice(pts.row(far));
            weights[j] = weights[j].max(RESEED_WEIGHT_FLOOR);
            report.reseed_events += 1;
        }
        let wsum: f64 = weights.iter().sum();
        let log_wsum = ln(wsum);
        model = SoftModel {
            log_weights: weights.iter().map(|w| ln(*w) - log_wsum).collect(),
            centers: PointSet::new(d, centers)?,
        };

        let prev = e.cost;
        e = e_step(spec, ws, &model);
        report.iterations += 1;
        report.cost_trace.push(e.cost);
        if !dying.is_empty() {
            report.reseed_steps.push(report.cost_trace.len() - 1);
        } else if prev - e.cost <= opts.tol * prev.abs() || e.cost == 0.0 {
            report.converged = true;
        }
    }
    Ok((model, report))
}

/// Weighted D²-seeding under the divergence's similarity metric.
pub fn seed_hard(spec: &DivergenceSpec, ws: &WeightedPointSet, k: usize, seed: u64) -> Result<HardModel> {
    let s = weighted_d2_sample(ws, k, spec.metric(), seed)?;
    Ok(HardModel::new(ws.points().select(&s.indices)))
}

/// As [`seed_hard`], with uniform mixture weights.
pub fn seed_soft(spec: &DivergenceSpec, ws: &WeightedPointSet, k: usize, seed: u64) -> Result<SoftModel> {
    seed_hard(spec, ws, k, seed).map(|h| SoftModel::uniform(h.centers))
}

/// D²-seeding followed by [`lloyd_bregman`].
pub fn fit_hard(
    spec: &DivergenceSpec,
    ws: &WeightedPointSet,
    k: usize,
    seed: u64,
    opts: FitOptions,
) -> Result<(HardModel, FitReport)> {
    let init = seed_hard(spec, ws, k, seed)?;
    lloyd_bregman(spec, ws, &init, opts)
}

/// D²-seeding followed by [`em_bregman`].
pub fn fit_soft(
    spec: &DivergenceSpec,
    ws: &WeightedPointSet,
    k: usize,
    seed: u64,
    opts: FitOptions,
) -> Result<(SoftModel, FitReport)> {
    let init = seed_soft(spec, ws, k, seed)?;
    em_bregman(spec, ws, &init, opts)
}
