//! Strong coresets for hard and soft clustering with μ-similar Bregman
//! divergences.
//!
//! The crate is `no_std` and needs only `alloc`:
//!
//! - [`divergence`]: the divergence family, its generic and closed forms and
//!   the `(μ, A)` similarity parameters
//! - [`linalg`]: Cholesky factors and the squared Mahalanobis distance
//! - [`points`]: plain and weighted point sets
//! - [`sampling`]: Mahalanobis D²-sampling, sensitivities, coresets and the
//!   uniform baseline
//! - [`clustering`]: weighted Lloyd and EM with their cost functions
//! - [`exact`]: exhaustive small-instance optimum, the coreset PTAS and the
//!   relative-error metric
//!
//! All randomized functions take an explicit `u64` seed; see [`rng`].

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod clustering;
pub mod divergence;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod math;
pub mod points;
pub mod rng;
pub mod sampling;

pub use clustering::{
    cost_hard, cost_soft, em_bregman, fit_hard, fit_soft, lloyd_bregman, point_soft_cost,
    responsibilities, seed_hard, seed_soft, FitOptions, FitReport, HardModel, SoftModel,
};
pub use divergence::{DivergenceKind, DivergenceSpec, Domain, Metric, SimilarityParams};
pub use error::{Error, Result};
pub use exact::{exhaustive_hard_optimum, ptas, relative_error, PtasOutcome};
pub use linalg::{cholesky_factor, mahalanobis_distance, Matrix, UpperTriangular};
pub use points::{clamp_to_domain, MixtureTruth, PointSet, WeightedPointSet};
pub use sampling::{
    best_bicriteria, build_coreset, build_coreset_detailed, d2_sample, sensitivities,
    uniform_subsample, BicriteriaSolution, Coreset, SensitivityTable,
};
