use thiserror::Error;

/// Errors produced across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("unsupported filter order {0} (expected one of 2, 4, 6, 8)")]
    UnsupportedOrder(usize),
    #[error("invalid epoch window: tmin {tmin} >= tmax {tmax}")]
    InvalidWindow { tmin: f64, tmax: f64 },
    #[error("signal too short: {0}")]
    TooShort(String),
    #[error("insufficient channels: {0}")]
    InsufficientChannels(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("channel layout mismatch: {0}")]
    Layout(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("invalid spec field `{field}`: {reason}")]
    InvalidSpec { field: String, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cross-validation folds: {0}")]
    Folds(String),
    #[error("criterion unavailable: {0}")]
    CriterionUnavailable(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("stream protocol error: {0}")]
    Protocol(String),
    #[error("transport closed: {0}")]
    Transport(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn spec(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
