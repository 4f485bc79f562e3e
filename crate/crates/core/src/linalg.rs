//! Dense square matrices, Cholesky factorization and the squared Mahalanobis
//! distance `(p - q)ᵀ A (p - q) = ‖U p - U q‖²` for `A = UᵀU`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = scale;
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows; every row must have as many entries as
    /// there are rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        coordinate: j,
                        value: v,
                    });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let row = self.row(i);
            let mut r = 0.0;
            for j in 0..self.dim {
                r += row[j] * v[j];
            }
            acc += v[i] * r;
        }
        acc
    }

    /// `(p - q)ᵀ M (p - q)` without allocating.
    pub fn quadratic_form_of_difference(&self, p: &[f64], q: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let row = self.row(i);
            let mut r = 0.0;
            for j in 0..self.dim {
                r += row[j] * (p[j] - q[j]);
            }
            acc += (p[i] - q[i]) * r;
        }
        acc
    }

    /// `M x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Upper-triangular factor `U` with a strictly positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    inner: Matrix,
}

impl UpperTriangular {
    pub fn identity(dim: usize) -> Self {
        Self {
            inner: Matrix::identity(dim),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner.get(row, col)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    /// Writes `U x` into `out`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let n = self.inner.dim;
        for i in 0..n {
            let row = self.inner.row(i);
            let mut acc = 0.0;
            for j in i..n {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.inner.dim];
        self.apply_into(x, &mut out);
        out
    }

    /// `UᵀU`.
    pub fn gram(&self) -> Matrix {
        let n = self.inner.dim;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let upto = i.min(j);
                let mut acc = 0.0;
                for l in 0..=upto {
                    acc += self.inner.get(l, i) * self.inner.get(l, j);
                }
                data[i * n + j] = acc;
            }
        }
        Matrix { dim: n, data }
    }

    /// `‖U (p - q)‖²` without allocating.
    pub fn sq_norm_of_difference(&self, p: &[f64], q: &[f64]) -> f64 {
        let n = self.inner.dim;
        let mut total = 0.0;
        for i in 0..n {
            let row = self.inner.row(i);
            let mut acc = 0.0;
            for j in i..n {
                acc += row[j] * (p[j] - q[j]);
            }
            total += acc * acc;
        }
        total
    }
}

/// Cholesky factorization `A = UᵀU` of a symmetric positive-definite matrix.
///
/// Symmetry is checked with a relative tolerance of `1e-12 · max|A|`. A
/// non-positive pivot is reported by its zero-based index.
pub fn cholesky_factor(a: &Matrix) -> Result<UpperTriangular> {
    let n = a.dim;
    let tol = 1e-12 * a.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a.get(i, j) - a.get(j, i)).abs() > tol {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        let mut pivot = a.get(i, i);
        for l in 0..i {
            pivot -= u[l * n + i] * u[l * n + i];
        }
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: i, value: pivot });
        }
        let diag = math::sqrt(pivot);
        u[i * n + i] = diag;
        for j in (i + 1)..n {
            let mut v = a.get(i, j);
            for l in 0..i {
                v -= u[l * n + i] * u[l * n + j];
            }
            u[i * n + j] = v / diag;
        }
    }
    Ok(UpperTriangular {
        inner: Matrix { dim: n, data: u },
    })
}

/// Squared Mahalanobis distance `‖U(p - q)‖²`.
pub fn mahalanobis_distance(u: &UpperTriangular, p: &[f64], q: &[f64]) -> Result<f64> {
    for v in [p, q] {
        if v.len() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                found: v.len(),
            });
        }
    }
    Ok(u.sq_norm_of_difference(p, q))
}
