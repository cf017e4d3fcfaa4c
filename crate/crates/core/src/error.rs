use thiserror::Error;

/// Failure modes shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("background mismatch: {0}")]
    BackgroundMismatch(String),

    #[error("hypothesis ({hypothesis}) violated: {detail}")]
    Hypothesis { hypothesis: char, detail: String },

    #[error("no admissible root bracketed: {0}")]
    NoBracket(String),

    #[error("no solitary wave exists: {0}")]
    NoSoliton(String),

    #[error("unsupported nonlinearity: {0}")]
    Unsupported(String),

    #[error("blow-up detected at t = {t}: sup norm {sup:.3e} exceeds {threshold:.3e}")]
    BlowUp { t: f64, sup: f64, threshold: f64 },

    #[error("time step {dt} exceeds the stability bound {bound:.3e}")]
    UnstableTimeStep { dt: f64, bound: f64 },

    #[error("modulation fit left the tube after {iterations} Newton iterations (residual {residual:.3e})")]
    OutOfTube { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
