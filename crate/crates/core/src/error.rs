use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A special-function evaluation did not converge.
    #[error("evaluation of J_{nu}({z}) failed: {reason}")]
    Evaluation { nu: f64, z: f64, reason: String },

    /// An argument is outside the region where the routine is valid.
    #[error("domain violation: {0}")]
    Domain(String),

    /// An error estimate exceeded the requested tolerance.
    #[error("accuracy failure in {context}: estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Accuracy {
        context: String,
        estimate: f64,
        tolerance: f64,
    },

    /// A field is not negligible at the faces of its periodic box.
    #[error("truncation violation: {context} (boundary ratio {ratio:e}, tolerance {tolerance:e})")]
    Truncation {
        context: String,
        ratio: f64,
        tolerance: f64,
    },

    /// An input has (numerically) vanishing norm.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Too few samples to fit or classify.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Required input values are missing.
    #[error("incomplete input: {0}")]
    InputIncomplete(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
