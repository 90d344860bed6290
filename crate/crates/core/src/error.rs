//! Error type shared by every stage of the pipeline.

use std::path::PathBuf;

/// Errors produced while decoding, extracting, training or persisting.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A RIFF/WAVE container could not be parsed.
    #[error("malformed WAV: {chunk} chunk: {reason}")]
    Decode {
        /// Chunk identifier where parsing failed (e.g. "RIFF", "fmt ", "data").
        chunk: String,
        /// Human-readable cause.
        reason: String,
    },

    /// The container is valid but its codec or layout is not supported.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// An input that must contain samples or items was empty.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A time series does not carry the expected sample rate.
    #[error("sample rate mismatch: found {found} Hz, expected {expected} Hz")]
    RateMismatch {
        /// Rate found on the input.
        found: u32,
        /// Rate required by the caller.
        expected: u32,
    },

    /// Tensor or matrix dimensions are inconsistent.
    #[error("shape error: {0}")]
    Shape(String),

    /// A scalar parameter is outside its allowed range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A value lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A run or synthesis configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A feature/parameter container is malformed.
    #[error("format error at byte {offset}: {reason}")]
    Format {
        /// Byte offset at which the problem was detected.
        offset: u64,
        /// Human-readable cause.
        reason: String,
    },

    /// An error tied to a specific file on disk.
    #[error("{}: {source}", path.display())]
    File {
        /// Offending file.
        path: PathBuf,
        /// Underlying error.
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Attach a file path to an error.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True when the error stems from an invalid configuration rather than
    /// from I/O or data corruption. The CLI maps these to exit code 2.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::RateMismatch { .. } => true,
            Error::File { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
