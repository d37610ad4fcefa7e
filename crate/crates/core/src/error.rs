use thiserror::Error;

/// Errors raised by the measurement models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrmError {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index does not address a component of the state.
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The breaking point sits on a tension line: two or more regions tie.
    #[error("breaking point on a region boundary (unstable equilibrium)")]
    Boundary,

    /// Collapse was requested onto an outcome of zero weight.
    #[error("impossible outcome: block has zero weight")]
    ImpossibleOutcome,

    /// A density without breakable support.
    #[error("degenerate density: {0}")]
    DegenerateDensity(String),

    /// Resampling of boundary breaking points did not terminate.
    #[error("boundary resampling exceeded {0} attempts")]
    ResampleLimit(usize),

    /// Malformed experiment configuration or bundle.
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, TrmError>;

pub(crate) fn domain(msg: impl Into<String>) -> TrmError {
    TrmError::Domain(msg.into())
}
