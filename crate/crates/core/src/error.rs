use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pole at s = {0}")]
    Pole(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
    #[error("sieve limit {requested} exceeds capacity {cap}")]
    SieveCapacity { requested: u64, cap: u64 },
    #[error("degenerate quadrature: {0}")]
    DegenerateQuadrature(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument { name, reason: reason.into() }
}
