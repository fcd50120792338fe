use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Hurst index is too close to 0 or 1 for the constants to be usable.
    #[error("hurst index {h} is within the degenerate clamp of the endpoints (allowed range [{min}, {max}])")]
    DegenerateHurst { h: f64, min: f64, max: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A configured resource cap (path length, partition size) would be exceeded.
    #[error("resource cap exceeded: {what} = {requested} > {cap}")]
    ResourceCap { what: &'static str, requested: usize, cap: usize },

    #[error("covariance matrix is not numerically positive definite (n = {0})")]
    NotPositiveDefinite(usize),

    /// The estimator input carries no variation (e.g. constant prices).
    #[error("degenerate estimator input: {0}")]
    DegenerateInput(String),

    /// Novikov's condition is only verified for eps > delta(H) * T.
    #[error(
        "eps = {eps} is not admissible for h = {h}: Novikov's condition is only established for \
         eps > delta(H) * T = {bound} (the unmodified process fails it)"
    )]
    Inadmissible { eps: f64, h: f64, bound: f64 },

    #[error(
        "finite-difference grid too coarse: refinement changed the price by {rel_change:.3e} (tolerance {tol:.1e})"
    )]
    GridTooCoarse { rel_change: f64, tol: f64 },

    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than a numerical or runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::DegenerateHurst { .. }
                | Error::InvalidGrid(_)
                | Error::InvalidParameter(_)
                | Error::ResourceCap { .. }
                | Error::Inadmissible { .. }
                | Error::Parse { .. }
                | Error::Validation(_)
        )
    }
}
