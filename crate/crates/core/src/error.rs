use thiserror::Error;

/// Errors raised across the crate.
///
/// The variants split into validation failures (bad shapes, bad input
/// files) and numerical failures (non-stable forms, divergence). The CLI
/// maps the first group to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("invalid multi-index {indices:?} for dimension {dim}")]
    InvalidIndex { indices: Vec<usize>, dim: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("metric is not symmetric positive-definite: {0}")]
    NotPositiveDefinite(String),

    #[error("exact arithmetic cannot represent {0}")]
    Inexact(String),

    #[error("3-form is not stable: {0}")]
    UnstableForm(String),

    #[error("eigenvalue splitting failed: {0}")]
    EigenSplit(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// `history` holds `(step, asd_fraction, charge)` up to the failure.
    #[error("cooling diverged after {steps} steps: {reason}")]
    Divergence { steps: usize, reason: String, history: Vec<(usize, f64, f64)> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite(_)
                | Error::UnstableForm(_)
                | Error::EigenSplit(_)
                | Error::Divergence { .. }
                | Error::Inexact(_)
        )
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::DegreeMismatch { .. } => "degree-mismatch",
            Error::InvalidIndex { .. } => "invalid-index",
            Error::Shape(_) => "shape",
            Error::NotPositiveDefinite(_) => "not-positive-definite",
            Error::Inexact(_) => "inexact",
            Error::UnstableForm(_) => "unstable-form",
            Error::EigenSplit(_) => "eigen-split",
            Error::Invalid(_) => "invalid-input",
            Error::Divergence { .. } => "divergence",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
