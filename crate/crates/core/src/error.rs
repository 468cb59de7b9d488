use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid generator, drive or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unsupported polynomial order {0} (supported: 2..=32)")]
    UnsupportedOrder(u32),
    /// Argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value: {0}")]
    Numeric(String),
    #[error("chain diverged at iteration {iteration} (norm {norm:e})")]
    Divergence { iteration: usize, norm: f64 },
    #[error("data error: {0}")]
    Data(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
