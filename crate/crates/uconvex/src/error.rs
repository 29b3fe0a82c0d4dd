//! Crate-wide error type.

/// Errors surfaced by space operations, checkers and solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not a member of this space: {0}")]
    InvalidPoint(String),

    #[error("geodesic through the cone apex is unsupported (base angle {angle} >= pi)")]
    ApexGeodesic { angle: f64 },

    #[error("ray projection is only defined for base angle <= pi/2, got {angle}")]
    ProjectionRange { angle: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("family is not {eps}-separated: points {i} and {j} are at distance {dist}")]
    NotSeparated { eps: f64, i: usize, j: usize, dist: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
