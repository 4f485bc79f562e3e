use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {coordinate} = {value} lies outside the domain [{low}, {high}]")]
    Domain {
        coordinate: usize,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("non-finite value {value} at coordinate {coordinate}")]
    NonFinite { coordinate: usize, value: f64 },

    #[error("invalid divergence specification: {0}")]
    InvalidSpec(String),

    #[error("matrix is not positive definite: pivot {pivot} is {value}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot choose {k} centers from {n} points")]
    TooFewPoints { k: usize, n: usize },

    #[error("{partitions} partitions exceed the enumeration limit of {limit}")]
    PartitionLimit { partitions: u128, limit: u128 },

    #[error("reference cost must be positive, got {0}")]
    NonPositiveReference(f64),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
