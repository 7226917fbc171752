use thiserror::Error;

/// Errors raised by constructors and operations across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent must satisfy p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("exponent mismatch: {left} vs {right}")]
    ExponentMismatch { left: f64, right: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid measure space: {0}")]
    InvalidSpace(String),
    #[error("invalid spatial system: {0}")]
    InvalidSystem(String),
    #[error("system is semispatial (not bijective onto its range set), reverse undefined")]
    NotBijective,
    #[error("source dimension {dim} exceeds brute-force oracle cap {cap}")]
    DimensionAboveCap { dim: usize, cap: usize },
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("invalid dynamical system: {0}")]
    InvalidDynamics(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),
    #[error("composition leaves no valid window")]
    EmptyWindow,
    #[error("no factorization available: {0}")]
    NoFactorization(String),
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("serialization error: {0}")]
    Serde(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
