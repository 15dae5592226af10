use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("coefficients are not Hermitian (max defect {defect:e})")]
    NonHermitian { defect: f64 },
    #[error("field has nonzero mean (|c_0| = {mean:e})")]
    NonzeroMean { mean: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("blow-up: non-finite state after t = {last_valid_time}")]
    BlowUp { last_valid_time: f64 },
    #[error("path mismatch: {0}")]
    PathMismatch(String),
    #[error("integrand violates its growth bound: {0}")]
    GrowthViolation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
