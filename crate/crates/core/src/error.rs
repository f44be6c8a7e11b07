use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain of an operation (off-constraint point, non-unit normal, ...).
    #[error("domain error: {constraint} violated (residual {residual:e})")]
    Domain { constraint: String, residual: f64 },

    /// Adaptive stepping could not make progress.
    #[error("integration failed at t = {last_time}: {reason}")]
    IntegrationFailure { last_time: f64, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: String,
    },

    /// The singular-value spectrum at a candidate focal time has no clean gap.
    #[error("ambiguous corank at t = {time}: spectrum {spectrum:?}")]
    AmbiguousCorank { time: f64, spectrum: Vec<f64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("numerical degeneracy: {reason}; spectrum {spectrum:?}")]
    NumericalDegeneracy { reason: String, spectrum: Vec<f64> },

    #[error("lookup error: {0}")]
    Lookup(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(constraint: impl Into<String>, residual: f64) -> Self {
        Error::Domain {
            constraint: constraint.into(),
            residual,
        }
    }

    pub(crate) fn mismatch(expected: usize, got: usize, context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            expected,
            got,
            context: context.into(),
        }
    }
}
