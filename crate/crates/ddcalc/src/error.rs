use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum DdError {
    /// An argument lies outside the domain of a function or operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A function descriptor cannot supply a required derivative order.
    #[error("capability error: {0}")]
    Capability(String),

    /// An iterative scheme stopped before reaching the requested tolerance.
    /// Carries the best estimate achieved and the estimated error.
    #[error("tolerance not met: best estimate {best}, estimated error {error}")]
    ToleranceNotMet { best: f64, error: f64 },

    /// A contour or other geometric configuration is invalid.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A stated precondition on the inputs is violated.
    #[error("precondition error: {0}")]
    Precondition(String),

    /// A contraction kernel is non-finite at a needed eigenvalue tuple.
    #[error("kernel singularity at eigenvalue tuple {0:?}")]
    KernelSingularity(Vec<f64>),

    /// A numerical routine failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, DdError>;
