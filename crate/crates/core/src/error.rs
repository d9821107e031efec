use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation; `field` names the offending input.
    #[error("{message}")]
    InvalidParameter { field: String, message: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("need at least as many samples as features (n = {n}, p = {p})")]
    Underdetermined { n: usize, p: usize },

    #[error("all correntropy weights are below 1e-300 for sigma = {sigma}; use a larger sigma")]
    DegenerateWeights { sigma: f64 },

    #[error("normal equations are singular even after ridge jitter")]
    SingularSystem,

    #[error("quadrature did not converge: last two estimates {estimate} and {previous} differ by {achieved:e}")]
    Quadrature {
        estimate: f64,
        previous: f64,
        achieved: f64,
    },

    #[error("grid quadrature supports d <= 3 (got d = {0}); use the monte-carlo method")]
    GridDimension(usize),

    #[error("{0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
