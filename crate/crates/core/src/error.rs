use std::io;

/// Errors produced by every fallible operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("undefined AUC: {0}")]
    UndefinedAuc(String),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    Checksum { stored: u64, computed: u64 },
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Config(_) => "config",
            Error::Numeric(_) => "numeric",
            Error::Usage(_) => "usage",
            Error::UndefinedAuc(_) => "undefined-auc",
            Error::BadMagic { .. } => "bad-magic",
            Error::VersionMismatch { .. } => "version-mismatch",
            Error::Checksum { .. } => "checksum",
            Error::Truncated(_) => "truncated",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure_dims {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::Error::Dimension(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_dims;
