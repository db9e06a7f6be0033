use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angle is undefined at the origin")]
    Origin,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fit window too wide: empirical survival is zero at t = {t}")]
    ZeroSurvival { t: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed exit-sample file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
