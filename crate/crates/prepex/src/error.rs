//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by cone construction, solvers, and simulators.
#[derive(Debug, Error)]
pub enum Error {
    /// An input vector or matrix does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An input violates a precondition (domain, emptiness, range).
    #[error("rejected input: {0}")]
    RejectedInput(String),

    /// A cone or instance could not be built; names the violated invariant.
    #[error("construction error: {0}")]
    Construction(String),

    /// An iterative routine failed to converge to tolerance.
    #[error("numerical error: {message} (residual {residual:.3e})")]
    Numerical { message: String, residual: f64 },

    /// A closed form hit a structural zero (e.g. a zero preference component
    /// on an objective with a nonzero policy gap).
    #[error("singularity: {0}")]
    Singularity(String),

    /// The disjunction collapsed: no nonzero valid inequality exists.
    #[error("degenerate disjunction: {0}")]
    DegenerateDisjunction(String),

    /// The instance admits no distinguishable alternative (value below floor).
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// A solver error with the step index of the run that triggered it.
    #[error("solver failed at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
