//! μ-similar Bregman divergences.
//!
//! A Bregman divergence with generator `φ` is
//! `d_φ(p, q) = φ(p) − φ(q) − ∇φ(q)ᵀ(p − q)`. It is μ-similar when a
//! positive-definite `A` exists with `μ·d_A(p, q) ≤ d_φ(p, q) ≤ d_A(p, q)`
//! on the whole domain, where `d_A` is the squared Mahalanobis distance.
//!
//! Every kind except [`DivergenceKind::Mahalanobis`] is separable, so its
//! `(μ, A)` pair follows from bounds on `φ''` over the domain box: with
//! `h_min ≤ φ''(t) ≤ h_max` one gets `A = (h_max / 2)·I` and
//! `μ = h_min / h_max`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, Matrix, UpperTriangular};
use crate::math::{exp, ln, powf, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivergenceKind {
    SquaredEuclidean,
    Mahalanobis,
    RelativeEntropy,
    ItakuraSaito,
    Harmonic,
    NormLike,
    ExponentialLoss,
    Hellinger,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 8] = [
        DivergenceKind::SquaredEuclidean,
        DivergenceKind::Mahalanobis,
        DivergenceKind::RelativeEntropy,
        DivergenceKind::ItakuraSaito,
        DivergenceKind::Harmonic,
        DivergenceKind::NormLike,
        DivergenceKind::ExponentialLoss,
        DivergenceKind::Hellinger,
    ];

    /// The lower_snake_case name used in serialized specs.
    pub fn name(self) -> &'static str {
        match self {
            Self::SquaredEuclidean => "squared_euclidean",
            Self::Mahalanobis => "mahalanobis",
            Self::RelativeEntropy => "relative_entropy",
            Self::ItakuraSaito => "itakura_saito",
            Self::Harmonic => "harmonic",
            Self::NormLike => "norm_like",
            Self::ExponentialLoss => "exponential_loss",
            Self::Hellinger => "hellinger",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the kind is defined only on a box `[λ, ν]^d`.
    pub fn has_box_domain(self) -> bool {
        !matches!(self, Self::SquaredEuclidean | Self::Mahalanobis)
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Domain of a divergence: all of `R^d` or a closed box `[low, high]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Unbounded,
    Box { low: f64, high: f64 },
}

impl Domain {
    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        match *self {
            Domain::Unbounded => t.is_finite(),
            Domain::Box { low, high } => t >= low && t <= high,
        }
    }

    #[inline]
    pub fn clamp(&self, t: f64) -> f64 {
        match *self {
            Domain::Unbounded => t,
            Domain::Box { low, high } => t.clamp(low, high),
        }
    }
}

/// The squared Mahalanobis metric `d_A`, stored through its Cholesky factor.
/// `A = c·I` keeps only the scalar.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    ScaledIdentity { dim: usize, scale: f64 },
    Full(UpperTriangular),
}

impl Metric {
    pub fn euclidean(dim: usize) -> Self {
        Metric::ScaledIdentity { dim, scale: 1.0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            Metric::ScaledIdentity { dim, .. } => *dim,
            Metric::Full(u) => u.dim(),
        }
    }

    /// `d_A(p, q)`; slices must have length `dim`.
    #[inline]
    pub fn sq_dist(&self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Metric::ScaledIdentity { scale, .. } => scale * crate::math::sq_euclidean(p, q),
            Metric::Full(u) => u.sq_norm_of_difference(p, q),
        }
    }

    /// Maps `x ↦ U x`, after which `d_A` is the squared Euclidean distance.
    pub fn whiten_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Metric::ScaledIdentity { scale, .. } => {
                let s = sqrt(*scale);
                for (o, v) in out.iter_mut().zip(x) {
                    *o = s * v;
                }
            }
            Metric::Full(u) => u.apply_into(x, out),
        }
    }

    /// The matrix `A`.
    pub fn matrix(&self) -> Matrix {
        match self {
            Metric::ScaledIdentity { dim, scale } => Matrix::scaled_identity(*dim, *scale),
            Metric::Full(u) => u.gram(),
        }
    }

    /// The upper-triangular factor `U` with `UᵀU = A`.
    pub fn cholesky_u(&self) -> UpperTriangular {
        match self {
            Metric::ScaledIdentity { dim, scale } => {
                cholesky_factor(&Matrix::scaled_identity(*dim, *scale))
                    .expect("positive scale gives a positive-definite matrix")
            }
            Metric::Full(u) => u.clone(),
        }
    }
}

/// The pair `(μ, A)` certifying μ-similarity, with `A`'s factor precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityParams {
    pub mu: f64,
    pub metric: Metric,
}

impl SimilarityParams {
    pub fn a(&self) -> Matrix {
        self.metric.matrix()
    }

    pub fn cholesky_u(&self) -> UpperTriangular {
        self.metric.cholesky_u()
    }
}

/// A validated μ-similar Bregman divergence.
///
/// Construct through [`DivergenceSpec::new`] or one of the per-kind helpers.
/// Points are checked against the domain with closed-interval comparison
/// and no tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceSpec {
    kind: DivergenceKind,
    dim: usize,
    domain: Domain,
    alpha: Option<f64>,
    matrix: Option<Matrix>,
    similarity: SimilarityParams,
}

impl DivergenceSpec {
    /// Validates the parameters for `kind`.
    ///
    /// `low`/`high` are the box bounds `λ`/`ν` for box kinds; Hellinger uses
    /// `[-ν, ν]` and accepts `low` either absent or equal to `-high`.
    /// `alpha` is read by Harmonic and NormLike, `matrix` by Mahalanobis.
    pub fn new(
        kind: DivergenceKind,
        dim: usize,
        low: Option<f64>,
        high: Option<f64>,
        alpha: Option<f64>,
        matrix: Option<Matrix>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let domain = match kind {
            DivergenceKind::SquaredEuclidean | DivergenceKind::Mahalanobis => Domain::Unbounded,
            DivergenceKind::Hellinger => {
                let nu = high.ok_or_else(|| invalid("hellinger requires nu"))?;
                if !(nu > 0.0 && nu < 1.0) {
                    return Err(invalid("hellinger requires 0 < nu < 1"));
                }
                if let Some(l) = low {
                    if l != -nu {
                        return Err(invalid("hellinger domain is [-nu, nu]; lambda must be -nu"));
                    }
                }
                Domain::Box { low: -nu, high: nu }
            }
            _ => {
                let (l, h) = bounds(kind, low, high)?;
                if !(l > 0.0) {
                    return Err(invalid(&alloc::format!("{kind} requires lambda > 0")));
                }
                Domain::Box { low: l, high: h }
            }
        };
        let alpha = match kind {
            DivergenceKind::Harmonic => {
                let a = alpha.ok_or_else(|| invalid("harmonic requires alpha"))?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(invalid("harmonic requires alpha > 0"));
                }
                Some(a)
            }
            DivergenceKind::NormLike => {
                let a = alpha.ok_or_else(|| invalid("norm_like requires alpha"))?;
                if !(a > 2.0 && a.is_finite()) {
                    return Err(invalid("norm_like requires alpha > 2"));
                }
                Some(a)
            }
            _ => None,
        };
        let (matrix, metric) = if kind == DivergenceKind::Mahalanobis {
            let m = matrix.ok_or_else(|| invalid("mahalanobis requires a matrix"))?;
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            let u = cholesky_factor(&m)?;
            (Some(m), Metric::Full(u))
        } else {
            let scale = hessian_half_max(kind, domain, alpha);
            (None, Metric::ScaledIdentity { dim, scale })
        };
        let mu = similarity_mu(kind, domain, alpha);
        Ok(Self {
            kind,
            dim,
            domain,
            alpha,
            matrix,
            similarity: SimilarityParams { mu, metric },
        })
    }

    pub fn squared_euclidean(dim: usize) -> Self {
        Self::new(DivergenceKind::SquaredEuclidean, dim, None, None, None, None)
            .expect("positive dim")
    }

    pub fn mahalanobis(a: Matrix) -> Result<Self> {
        Self::new(DivergenceKind::Mahalanobis, a.dim(), None, None, None, Some(a))
    }

    pub fn relative_entropy(dim: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(DivergenceKind::RelativeEntropy, dim, Some(low), Some(high), None, None)
    }

    pub fn itakura_saito(dim: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(DivergenceKind::ItakuraSaito, dim, Some(low), Some(high), None, None)
    }

    pub fn harmonic(dim: usize, low: f64, high: f64, alpha: f64) -> Result<Self> {
        Self::new(DivergenceKind::Harmonic, dim, Some(low), Some(high), Some(alpha), None)
    }

    pub fn norm_like(dim: usize, low: f64, high: f64, alpha: f64) -> Result<Self> {
        Self::new(DivergenceKind::NormLike, dim, Some(low), Some(high), Some(alpha), None)
    }

    pub fn exponential_loss(dim: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(DivergenceKind::ExponentialLoss, dim, Some(low), Some(high), None, None)
    }

    pub fn hellinger(dim: usize, nu: f64) -> Result<Self> {
        Self::new(DivergenceKind::Hellinger, dim, None, Some(nu), None, None)
    }

    pub fn kind(&self) -> DivergenceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    /// The user matrix of a Mahalanobis spec.
    pub fn matrix(&self) -> Option<&Matrix> {
        self.matrix.as_ref()
    }

    /// `(μ, A)` for this divergence.
    pub fn similarity_params(&self) -> &SimilarityParams {
        &self.similarity
    }

    pub fn metric(&self) -> &Metric {
        &self.similarity.metric
    }

    /// Checks dimension and domain membership of a point.
    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    coordinate: i,
                    value: v,
                });
            }
            if !self.domain.contains(v) {
                let (low, high) = match self.domain {
                    Domain::Box { low, high } => (low, high),
                    Domain::Unbounded => (f64::NEG_INFINITY, f64::INFINITY),
                };
                return Err(Error::Domain {
                    coordinate: i,
                    value: v,
                    low,
                    high,
                });
            }
        }
        Ok(())
    }

    /// The generator `φ(x)`. No domain check.
    pub fn generator(&self, x: &[f64]) -> f64 {
        match self.kind {
            DivergenceKind::Mahalanobis => self.matrix.as_ref().unwrap().quadratic_form(x),
            _ => x.iter().map(|&t| self.phi(t)).sum(),
        }
    }

    /// The gradient `∇φ(x)`. No domain check.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            DivergenceKind::Mahalanobis => {
                let a = self.matrix.as_ref().unwrap();
                a.mul_vec(x).into_iter().map(|v| 2.0 * v).collect()
            }
            _ => x.iter().map(|&t| self.dphi(t)).collect(),
        }
    }

    /// `φ(p) − φ(q) − ∇φ(q)ᵀ(p − q)`, evaluated literally.
    pub fn bregman_generic(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        let grad = self.gradient(q);
        let lin: f64 = grad.iter().zip(p.iter().zip(q)).map(|(g, (a, b))| g * (a - b)).sum();
        Ok((self.generator(p) - self.generator(q) - lin).max(0.0))
    }

    /// The closed form of the divergence.
    pub fn bregman_closed(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.divergence_unchecked(p, q))
    }

    /// Closed-form divergence without dimension or domain checks. Callers
    /// must have validated both arguments.
    #[inline]
    pub fn divergence_unchecked(&self, p: &[f64], q: &[f64]) -> f64 {
        let d = match self.kind {
            DivergenceKind::SquaredEuclidean => crate::math::sq_euclidean(p, q),
            DivergenceKind::Mahalanobis => {
                self.matrix.as_ref().unwrap().quadratic_form_of_difference(p, q)
            }
            kind => {
                let alpha = self.alpha.unwrap_or(0.0);
                p.iter()
                    .zip(q)
                    .map(|(&a, &b)| closed_scalar(kind, alpha, a, b))
                    .sum()
            }
        };
        d.max(0.0)
    }

    fn phi(&self, t: f64) -> f64 {
        let alpha = self.alpha.unwrap_or(0.0);
        match self.kind {
            DivergenceKind::SquaredEuclidean => t * t,
            DivergenceKind::RelativeEntropy => t * ln(t) - t,
            DivergenceKind::ItakuraSaito => -ln(t),
            DivergenceKind::Harmonic => powf(t, -alpha),
            DivergenceKind::NormLike => powf(t, alpha),
            DivergenceKind::ExponentialLoss => exp(t),
            DivergenceKind::Hellinger => -sqrt(1.0 - t * t),
            DivergenceKind::Mahalanobis => unreachable!("not separable"),
        }
    }

    fn dphi(&self, t: f64) -> f64 {
        let alpha = self.alpha.unwrap_or(0.0);
        match self.kind {
            DivergenceKind::SquaredEuclidean => 2.0 * t,
            DivergenceKind::RelativeEntropy => ln(t),
            DivergenceKind::ItakuraSaito => -1.0 / t,
            DivergenceKind::Harmonic => -alpha * powf(t, -alpha - 1.0),
            DivergenceKind::NormLike => alpha * powf(t, alpha - 1.0),
            DivergenceKind::ExponentialLoss => exp(t),
            DivergenceKind::Hellinger => t / sqrt(1.0 - t * t),
            DivergenceKind::Mahalanobis => unreachable!("not separable"),
        }
    }
}

#[inline]
fn closed_scalar(kind: DivergenceKind, alpha: f64, p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    match kind {
        DivergenceKind::RelativeEntropy => p * ln(p / q) - (p - q),
        DivergenceKind::ItakuraSaito => {
            let r = p / q;
            r - ln(r) - 1.0
        }
        DivergenceKind::Harmonic => {
            powf(p, -alpha) - (alpha + 1.0) * powf(q, -alpha) + alpha * p * powf(q, -alpha - 1.0)
        }
        DivergenceKind::NormLike => {
            powf(p, alpha) + (alpha - 1.0) * powf(q, alpha) - alpha * p * powf(q, alpha - 1.0)
        }
        DivergenceKind::ExponentialLoss => exp(p) - (p - q + 1.0) * exp(q),
        DivergenceKind::Hellinger => {
            // (1 − pq)/b − a  =  (p − q)² [1 + ((p + q)/(a + b))²] / (2b)
            // with a = √(1 − p²), b = √(1 − q²)
            let a = sqrt(1.0 - p * p);
            let b = sqrt(1.0 - q * q);
            let t = (p + q) / (a + b);
            (p - q) * (p - q) * (1.0 + t * t) / (2.0 * b)
        }
        DivergenceKind::SquaredEuclidean => (p - q) * (p - q),
        DivergenceKind::Mahalanobis => unreachable!("not separable"),
    }
}

fn box_of(domain: Domain) -> (f64, f64) {
    match domain {
        Domain::Box { low, high } => (low, high),
        Domain::Unbounded => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// `max φ'' / 2` over the domain, i.e. the scale `c` of `A = c·I`.
fn hessian_half_max(kind: DivergenceKind, domain: Domain, alpha: Option<f64>) -> f64 {
    let (l, h) = box_of(domain);
    let a = alpha.unwrap_or(0.0);
    match kind {
        DivergenceKind::SquaredEuclidean | DivergenceKind::Mahalanobis => 1.0,
        DivergenceKind::RelativeEntropy => 1.0 / (2.0 * l),
        DivergenceKind::ItakuraSaito => 1.0 / (2.0 * l * l),
        DivergenceKind::Harmonic => a * (a + 1.0) / (2.0 * powf(l, a + 2.0)),
        DivergenceKind::NormLike => a * (a - 1.0) / 2.0 * powf(h, a - 2.0),
        DivergenceKind::ExponentialLoss => exp(h) / 2.0,
        DivergenceKind::Hellinger => 1.0 / (2.0 * powf(1.0 - h * h, 1.5)),
    }
}

/// `min φ'' / max φ''` over the domain.
fn similarity_mu(kind: DivergenceKind, domain: Domain, alpha: Option<f64>) -> f64 {
    let (l, h) = box_of(domain);
    let a = alpha.unwrap_or(0.0);
    match kind {
        DivergenceKind::SquaredEuclidean | DivergenceKind::Mahalanobis => 1.0,
        DivergenceKind::RelativeEntropy => l / h,
        DivergenceKind::ItakuraSaito => (l * l) / (h * h),
        DivergenceKind::Harmonic => powf(l / h, a + 2.0),
        DivergenceKind::NormLike => powf(l / h, a - 2.0),
        DivergenceKind::ExponentialLoss => exp(-(h - l)),
        DivergenceKind::Hellinger => powf(1.0 - h * h, 1.5),
    }
}

fn bounds(kind: DivergenceKind, low: Option<f64>, high: Option<f64>) -> Result<(f64, f64)> {
    let l = low.ok_or_else(|| invalid(&alloc::format!("{kind} requires lambda")))?;
    let h = high.ok_or_else(|| invalid(&alloc::format!("{kind} requires nu")))?;
    if !(l.is_finite() && h.is_finite() && l < h) {
        return Err(invalid(&alloc::format!("{kind} requires finite lambda < nu")));
    }
    Ok((l, h))
}

fn invalid(msg: &str) -> Error {
    Error::InvalidSpec(msg.into())
}
