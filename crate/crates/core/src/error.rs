use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("normalization error: r_00 = {0}, expected 1")]
    Normalization(f64),

    #[error("invalid correlations: {0}")]
    InvalidCorrelations(String),

    /// The marginal is (numerically) rank deficient; the pseudo-channel is
    /// not unique and the tau-parameterized family must be used instead.
    #[error("rank-deficient marginal (lambda_min = {lambda_min:e}); use the tau family")]
    RankDeficient { lambda_min: f64 },

    #[error("solver failed: {message} (best incumbent {best})")]
    Solver { message: String, best: f64 },

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
