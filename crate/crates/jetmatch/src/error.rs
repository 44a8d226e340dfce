//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rotation angle {angle} is at or beyond the principal branch cut")]
    AngleAtCut { angle: f64 },
    #[error("rotation is not in the identity component")]
    ImproperComponent,
    #[error("matrix is singular or nearly singular")]
    SingularMatrix,
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("unsupported jet order {k} for sampled curves (max {max})")]
    UnsupportedOrder { k: usize, max: usize },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("speed profile is not strictly increasing")]
    NonMonotoneProfile,
    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),
    #[error("Newton did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("shooting Jacobian is singular (condition estimate {cond:.3e})")]
    SingularJacobian { cond: f64 },
    #[error("all shooting starts failed")]
    AllStartsFailed,
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error("non-uniform grid in input file")]
    NonUniformGrid,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
