//! File formats, synthetic data generators, the experiment harness and the
//! command-line front end for [`coreset_core`].
//!
//! - [`io`]: points and weighted CSV, JSON specs and models
//! - [`generate`]: seeded Gaussian and Poisson mixtures
//! - [`experiment`]: coreset vs. uniform subsampling runs
//! - [`cli`]: the `coreset` binary

pub mod cli;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod io;

pub use error::{Error, Result};
