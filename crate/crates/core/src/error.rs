use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator not available on a {atom_dim}-level atom: {what}")]
    UnsupportedOperator { atom_dim: usize, what: &'static str },

    #[error("model kind mismatch: {0}")]
    ModelMismatch(String),

    #[error("photon truncation too small: P[{n_max}] = {tail:e}")]
    TruncationTooSmall { n_max: usize, tail: f64 },

    #[error("distribution is not normalizable (ratio {ratio} does not decay)")]
    NotNormalizable { ratio: f64 },

    #[error("degenerate linear system: {0}")]
    Degenerate(String),

    #[error("time step too large: dt * max_rate = {product} (must be < 0.1)")]
    StepTooLarge { product: f64 },

    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NotConverged { iterations: usize, best_residual: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
