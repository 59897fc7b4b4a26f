use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported cipher: {0}")]
    UnsupportedCipher(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed hex string: {0}")]
    Hex(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset generation failed: {0}")]
    Generation(String),

    #[error("pathway multiset exceeded the configured bound ({0} entries)")]
    ResourceGuard(usize),

    #[error("profile set incomplete: missing {0}")]
    ProfileGap(String),

    #[error("degenerate regression input: {0}")]
    Regression(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
