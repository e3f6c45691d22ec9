//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by linear algebra, oracle, updater, and solver operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The matrix handed to a positive-definite factorization is numerically
    /// indefinite. Solvers react by resetting the curvature approximation.
    #[error("symmetric positive-definite factorization failed (matrix is numerically indefinite)")]
    FactorizationFailed,

    /// A vector's length does not match the problem dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The displacement `s` is too small for a curvature update; the caller
    /// skips the update and keeps the current approximation.
    #[error("degenerate step: displacement norm below skip tolerance")]
    DegenerateStep,

    /// A curvature update produced an unusable matrix (zero curvature pairing
    /// or an indefinite result). Solvers reset to a shifted identity.
    #[error("curvature breakdown: {0}")]
    CurvatureBreakdown(String),

    /// A stepsize sequence violates the admissibility condition of the
    /// randomized stopping distribution.
    #[error("invalid stepsize sequence: {0}")]
    InvalidStepsize(String),

    /// A run configuration failed validation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
