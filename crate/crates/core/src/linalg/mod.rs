//! Linear-algebra kernels behind the eigensolvers.

pub mod banded;
pub mod dense;
pub mod lanczos;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("iteration did not converge after {iterations} steps")]
    NoConvergence { iterations: usize },
    #[error("exactly singular pivot at column {column}")]
    Singular { column: usize },
}
