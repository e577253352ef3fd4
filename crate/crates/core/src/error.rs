//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid too coarse for {what}: step {step} exceeds {max_step}")]
    Resolution { what: &'static str, step: f64, max_step: f64 },

    #[error("signals live on different grids")]
    GridMismatch,

    #[error("translation pushes non-negligible mass off-grid (lost fraction {lost_fraction:.3e})")]
    Truncation { lost_fraction: f64 },

    #[error("Gram matrix is not Hermitian within tolerance (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("Gram matrix numerically indefinite (min eigenvalue {min_eigenvalue:.3e})")]
    IndefiniteGram { min_eigenvalue: f64 },

    #[error("Gram matrix numerically singular")]
    SingularGram,

    #[error("Gram matrix too ill-conditioned (B/A = {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("quadrature box too small: tail-mass estimate {estimate:.3e}")]
    CoverageShortfall { estimate: f64 },

    #[error("weighted integral fails the nested-box Cauchy test (last increment {last_increment:.3e})")]
    DivergenceWarning { last_increment: f64 },

    #[error("hypothesis failure: {reason}")]
    HypothesisFailure { reason: String },

    #[error("epsilon too large for this section's dual bound (1 - B*eps = {one_minus_b_eps:.3e})")]
    EpsilonTooLarge { one_minus_b_eps: f64 },

    #[error("section/dual mismatch: {reason}")]
    SectionMismatch { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub fn hypothesis(reason: impl Into<String>) -> Self {
        Error::HypothesisFailure { reason: reason.into() }
    }
}
