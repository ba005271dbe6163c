use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported truncation scheme: {0}")]
    UnsupportedScheme(String),
    #[error("truncation lacks required operator {0}")]
    MissingOperator(String),
    #[error("problem too large: {0}")]
    Infeasible(String),
    #[error("integration blew up at t = {t}: norm ratio {ratio:.3e}")]
    BlowUp { t: f64, ratio: f64 },
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error("target {target} outside the reachable range [{lo}, {hi}]")]
    OutOfRange { target: f64, lo: f64, hi: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
