//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors produced by constructors, quadrature engines and solvers.
#[derive(Debug, Error)]
pub enum NmcError {
    /// Bad user-facing input: parameters outside their documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A kernel or operator was evaluated outside its validity region.
    #[error("domain error: {0}")]
    Domain(String),

    /// `p <= -1` at the origin: the requested integral does not exist.
    #[error("non-integrable singularity: exponent {0} at the origin")]
    NonIntegrableSingularity(f64),

    /// A quadrature engine exhausted its budget above the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    /// A band profile touched or crossed zero width.
    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    /// Root bracketing failed (no sign change in the search interval).
    #[error("bracketing failure: {0}")]
    Bracketing(String),

    /// Attempt to invert the linearized operator on a kernel direction.
    #[error("degenerate eigenvalue: {0}")]
    DegenerateEigenvalue(String),

    /// A ray met more boundary crossings than the configured budget.
    #[error("crossing budget exceeded: {0}")]
    CrossingBudget(String),

    /// The query point is not on the boundary of the set.
    #[error("point not on boundary: {0}")]
    OffBoundary(String),

    /// Newton iteration stalled above the residual tolerance.
    #[error("newton solve failed: {0}")]
    NewtonFailure(String),

    /// Continuation could not complete a step even after halving.
    #[error("continuation step failed: {0}")]
    StepFailure(String),

    /// Operation not defined for this shape or configuration.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Lookup of a strategy or suite name failed.
    #[error("unknown strategy '{name}' (available: {available})")]
    UnknownStrategy { name: String, available: String },
}

pub type Result<T> = std::result::Result<T, NmcError>;
