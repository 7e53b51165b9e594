//! Crate-wide error type.

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or inconsistent numeric input (shape mismatch, non-finite
    /// entries, indefinite matrix where PSD/PD is required, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An operation only defined for a specific dimension was called with
    /// another (planar rotations and principal angles are 2-D only).
    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    /// The covariance has no well-separated principal axis, so an
    /// orientation angle is undefined.
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),

    /// A state covariance is singular (or nearly so) where an inverse is
    /// required; deliberately not papered over with a pseudo-inverse.
    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    /// The conic backend failed to return a usable solution.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// An iterative run stopped early; carries the objective values of the
    /// iterations that did complete.
    #[error("run aborted after {} iterations: {reason}", objective_history.len())]
    AbortedRun {
        reason: String,
        objective_history: Vec<f64>,
    },

    /// A problem file failed to load; `path` is a JSON-pointer-like
    /// location inside the document.
    #[error("problem file error at `{path}`: {message}")]
    ProblemFormat { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// `true` for errors that indicate unusable *input* rather than a
    /// failure while solving. The CLI maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::UnsupportedDimension(_)
                | Error::ProblemFormat { .. }
                | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
