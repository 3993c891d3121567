use thiserror::Error;

/// Errors raised by geometry, statistics, inference and pipeline routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("eigenvalue {index} is {value:e}, not above the positive-definiteness threshold")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("frame index {index} out of range for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("covariance is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid dimension: {0}")]
    Dimension(String),

    #[error("tangent vector {index} has zero norm")]
    ZeroTangent { index: usize },

    #[error("insufficient data: need at least {needed}, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("singular normal equations{} (condition number {condition:e})", coordinate.map(|c| format!(" for coordinate {c}")).unwrap_or_default())]
    SingularNormalEquations {
        coordinate: Option<usize>,
        condition: f64,
    },

    #[error("Fisher information matrix is singular")]
    SingularFisher,

    #[error("total variation of tangent vectors is zero")]
    ZeroVariance,

    #[error("fits use different lags or restrictions: expected {expected}, found {found}")]
    MixedLag { expected: String, found: String },

    #[error("window of {samples} samples is too short (need at least 2)")]
    WindowTooShort { samples: usize },

    #[error("series were prepared with different reduction plans")]
    PlanMismatch,

    #[error("simulation step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("window {window}: {source}")]
    Window {
        window: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_window(self, window: usize) -> Self {
        Error::Window {
            window,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
