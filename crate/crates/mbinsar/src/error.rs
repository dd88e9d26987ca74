use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller supplied argument was rejected before any work started.
    #[error("invalid {name}: {message}")]
    InvalidParameter {
        name: &'static str,
        message: String,
    },

    /// Two grids that must share a shape do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A file did not match the expected on-disk layout.
    #[error("{path}: {message}")]
    Format { path: String, message: String },

    /// The normal equations cannot be solved; the message names the
    /// offending column or the structural cause.
    #[error("rank deficient system: {0}")]
    RankDeficient(String),

    /// A computation produced no usable result (e.g. every pixel masked).
    #[error("computation failed: {0}")]
    Computation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    /// True when the error is a rejection of the inputs rather than a
    /// failure of the computation itself. The CLI maps the two classes to
    /// different exit codes.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::RankDeficient(_) | Error::Computation(_))
    }
}
