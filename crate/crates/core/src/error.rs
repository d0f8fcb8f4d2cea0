use thiserror::Error;

/// Error type shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed file: wrong magic, version or dtype.
    #[error("format error: {0}")]
    Format(String),

    /// Data violates an invariant (non-finite values, out-of-range labels, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Bad experiment configuration (unknown key, unparsable value, missing file).
    #[error("config error: {0}")]
    Config(String),

    /// Training aborted, e.g. on a non-finite loss.
    #[error("training error: {0}")]
    Training(String),
}

pub type Result<T> = std::result::Result<T, Error>;
