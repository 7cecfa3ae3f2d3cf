use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("cutoff N = {given} leaves tail mass {tail:.3e} above tolerance {tol:.1e}; N = {required} is required")]
    CutoffTooSmall {
        given: usize,
        required: usize,
        tail: f64,
        tol: f64,
    },

    #[error("tail mass did not fall below {tol:.1e} before the hard ceiling N = {ceiling}")]
    CutoffNotConverged { tol: f64, ceiling: usize },

    #[error("working cutoff {given} leaves displaced tail mass {tail:.3e} > 1e-6; cutoff {required} is required")]
    InsufficientMargin {
        given: usize,
        required: usize,
        tail: f64,
    },

    #[error("conditional state trace drifted by {drift:.3e} at cascade stage {stage}")]
    TraceDrift { stage: usize, drift: f64 },

    #[error("only {found} cavity resonance(s) inside the state support (need at least 2)")]
    TooFewResonances { found: usize },

    #[error("phase grid is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
