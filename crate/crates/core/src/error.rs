use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures reported by the numerical modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The physical model is inconsistent (for example a non-positive frequency).
    #[error("model error: {0}")]
    Model(String),

    /// A tabulated function was queried outside its samples or is malformed.
    #[error("interpolation error: {0}")]
    Interpolation(String),

    /// A result overflowed or underflowed the working precision.
    #[error("range error: {0}")]
    Range(String),

    /// An infinite series was cut off before reaching its tolerance.
    #[error("{what} did not converge after {terms} terms (partial sum {partial}, last term {last_term:e})")]
    Convergence {
        what: String,
        terms: usize,
        partial: String,
        last_term: f64,
    },

    /// Round-off or discretisation error exceeds the requested tolerance.
    #[error("precision error: {message}")]
    Precision { message: String, suggestion: String },

    /// A Fock-space truncation is too small for the requested state.
    #[error("truncation error: {0}")]
    Truncation(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    pub(crate) fn precision(msg: impl Into<String>, suggestion: impl Into<String>) -> Self {
        Error::Precision {
            message: msg.into(),
            suggestion: suggestion.into(),
        }
    }
}
