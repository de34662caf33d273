//! Bootstrap inference for the leading eigenvalues of a sample covariance
//! matrix in high-dimensional PCA.

pub mod bench;
pub mod bootstrap;
pub mod cli;
pub mod error;
pub mod gamma;
pub mod ingest;
pub mod intervals;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod report;
pub mod resample;

pub use error::{Error, Result};
