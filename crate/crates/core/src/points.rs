//! Point-set containers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::divergence::{DivergenceSpec, Domain};
use crate::error::{Error, Result};
use crate::math::sqrt;

/// A finite, non-empty set of `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    /// Wraps row-major coordinates. `data.len()` must be a positive multiple
    /// of `dim` and every coordinate finite.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::InvalidParameter("point set is empty".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        if let Some((i, &v)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                coordinate: i % dim,
                value: v,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// The rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        PointSet {
            dim: self.dim,
            data,
        }
    }

    /// Checks that every point lies in the divergence's domain.
    pub fn check_domain(&self, spec: &DivergenceSpec) -> Result<()> {
        if spec.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: spec.dim(),
                found: self.dim,
            });
        }
        self.rows().try_for_each(|r| spec.check_point(r))
    }

    /// Per-coordinate `(min, max)`.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bb: Vec<(f64, f64)> = self.row(0).iter().map(|&v| (v, v)).collect();
        for r in self.rows() {
            for (b, &v) in bb.iter_mut().zip(r) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        bb
    }

    /// Unweighted mean of all points.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let mut m = alloc::vec![0.0; self.dim];
        for r in self.rows() {
            for (a, v) in m.iter_mut().zip(r) {
                *a += v;
            }
        }
        m.iter_mut().for_each(|a| *a /= n);
        m
    }

    /// Z-scores each column. Constant columns are only centered.
    pub fn standardize(&self) -> PointSet {
        let mean = self.mean();
        let n = self.len() as f64;
        let mut var = alloc::vec![0.0; self.dim];
        for r in self.rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd: Vec<f64> = var.iter().map(|v| sqrt(v / n)).collect();
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.dim) {
            for ((v, m), s) in row.iter_mut().zip(&mean).zip(&sd) {
                *v -= m;
                if *s > 0.0 {
                    *v /= s;
                }
            }
        }
        PointSet {
            dim: self.dim,
            data,
        }
    }
}

/// Clamps every coordinate into the spec's box and returns the number of
/// coordinates that moved. Unbounded domains are returned unchanged.
pub fn clamp_to_domain(ps: &PointSet, spec: &DivergenceSpec) -> (PointSet, usize) {
    let domain = spec.domain();
    let mut clamped = 0;
    let data = ps
        .data
        .iter()
        .map(|&v| {
            let c = domain.clamp(v);
            if c != v {
                clamped += 1;
            }
            c
        })
        .collect();
    if let Domain::Unbounded = domain {
        debug_assert_eq!(clamped, 0);
    }
    (
        PointSet {
            dim: ps.dim,
            data,
        },
        clamped,
    )
}

/// A weighted point set summarizing `origin_n` original points.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPointSet {
    points: PointSet,
    weights: Vec<f64>,
    origin_n: usize,
}

impl WeightedPointSet {
    pub fn new(points: PointSet, weights: Vec<f64>, origin_n: usize) -> Result<Self> {
        if weights.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "weights must be positive and finite, got {w}"
            )));
        }
        if origin_n == 0 {
            return Err(Error::InvalidParameter("origin_n must be positive".into()));
        }
        Ok(Self {
            points,
            weights,
            origin_n,
        })
    }

    /// Unit weights with `origin_n = n`.
    pub fn unit(points: PointSet) -> Self {
        let n = points.len();
        Self {
            points,
            weights: alloc::vec![1.0; n],
            origin_n: n,
        }
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn origin_n(&self) -> usize {
        self.origin_n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Merges rows with bitwise-identical coordinates by summing weights.
    /// Keeps first-occurrence order.
    pub fn merge_duplicates(&self) -> WeightedPointSet {
        let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut data = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (r, &w) in self.points.rows().zip(&self.weights) {
            let key: Vec<u64> = r.iter().map(|v| v.to_bits()).collect();
            match index.get(&key) {
                Some(&slot) => weights[slot] += w,
                None => {
                    index.insert(key, weights.len());
                    data.extend_from_slice(r);
                    weights.push(w);
                }
            }
        }
        WeightedPointSet {
            points: PointSet {
                dim: self.points.dim,
                data,
            },
            weights,
            origin_n: self.origin_n,
        }
    }
}

/// Ground truth of a sampled mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureTruth {
    pub component_weights: Vec<f64>,
    /// `k × d` component parameters (means or rates), row-major.
    pub component_params: PointSet,
    pub assignment: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_examples() {
        let spec = DivergenceSpec::relative_entropy(2, 0.5, 4.0).unwrap();
        let ps = PointSet::from_rows(&[[0.0, 5.0]]).unwrap();
        let (c, n) = clamp_to_domain(&ps, &spec);
        assert_eq!(c.row(0), &[0.5, 4.0]);
        assert_eq!(n, 2);

        let ps = PointSet::from_rows(&[[1.0, 2.0], [0.5, 4.0]]).unwrap();
        let (c, n) = clamp_to_domain(&ps, &spec);
        assert_eq!(c, ps);
        assert_eq!(n, 0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PointSet::new(2, alloc::vec![]).is_err());
        assert!(PointSet::new(2, alloc::vec![1.0, 2.0, 3.0]).is_err());
        assert!(PointSet::new(1, alloc::vec![f64::NAN]).is_err());
        let ps = PointSet::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(WeightedPointSet::new(ps.clone(), alloc::vec![1.0, -1.0], 2).is_err());
        assert!(WeightedPointSet::new(ps.clone(), alloc::vec![1.0], 2).is_err());
        assert!(WeightedPointSet::new(ps, alloc::vec![1.0, 1.0], 0).is_err());
    }

    #[test]
    fn unit_wrapper() {
        let ps = PointSet::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let ws = WeightedPointSet::unit(ps);
        assert_eq!(ws.weights(), &[1.0, 1.0, 1.0]);
        assert_eq!(ws.origin_n(), 3);
    }

    #[test]
    fn merge_sums_weights() {
        let ps = PointSet::from_rows(&[[1.0, 0.0], [2.0, 0.0], [1.0, 0.0]]).unwrap();
        let ws = WeightedPointSet::new(ps, alloc::vec![1.0, 2.0, 3.0], 10).unwrap();
        let m = ws.merge_duplicates();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights(), &[4.0, 2.0]);
        assert_eq!(m.points().row(0), &[1.0, 0.0]);
        assert_eq!(m.origin_n(), 10);
    }

    #[test]
    fn standardize_centers_and_scales() {
        let ps = PointSet::from_rows(&[[1.0, 5.0], [3.0, 5.0]]).unwrap();
        let s = ps.standardize();
        assert_eq!(s.row(0), &[-1.0, 0.0]);
        assert_eq!(s.row(1), &[1.0, 0.0]);
    }
}
