use thiserror::Error;

/// Errors raised by grid construction, field validation and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too coarse: {what} = {got}, need at least {min}")]
    GridTooCoarse { what: &'static str, got: usize, min: usize },
    #[error("field has {got} values but the grid has {expected} nodes")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite value {value} at node {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("warping function must be positive, node {index} has {value}")]
    NonPositive { index: usize, value: f64 },
    #[error("test function must be nonnegative, node {index} has {value}")]
    NegativeTestFunction { index: usize, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("geodesic seed must start at least two grid steps from the poles (r = {r})")]
    SeedNearPole { r: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
