//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("period matrix is not symmetric: |t[{i}][{j}] - t[{j}][{i}]| = {deviation:e}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },

    #[error("imaginary part of the period matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "truncation radius would exceed the cap of {cap} (tail target {target:e}); \
         the period matrix is too ill-conditioned for this tolerance"
    )]
    TruncationCap { cap: f64, target: f64 },

    #[error("zero search did not converge after {restarts} restarts x {iterations} iterations")]
    ZeroSearchFailed { restarts: usize, iterations: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
