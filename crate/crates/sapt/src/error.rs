use thiserror::Error;

#[derive(Debug, Error)]
pub enum SaptError {
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("product does not terminate: {0}")]
    NonTerminating(String),
    #[error("truncation mismatch: {0} vs {1}")]
    TruncationMismatch(usize, usize),
    #[error("scaling mismatch between series")]
    ScalingMismatch,
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("symbol cannot be quantized: {0}")]
    NonPolynomialSymbol(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SaptError>;
