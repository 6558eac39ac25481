//! Error taxonomy shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by library operations.
///
/// The variants map onto distinct failure classes so callers (notably the
/// CLI) can translate them into exit codes without string matching.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: shapes, windows, or layer stacks that cannot
    /// be assembled. Detected before any arithmetic runs.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller violated an operation's documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed or inconsistent input data (counts, alignments, labels).
    #[error("data error: {0}")]
    Data(String),

    /// Non-finite values produced where the contract requires finite output.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Exact integer arithmetic exceeded the platform integer range.
    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    /// A serialized container was malformed: bad magic, wrong version,
    /// truncated payload, or trailing bytes.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
