use thiserror::Error;

/// Errors raised by the spectral laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("spectrum is not Hermitian: relative defect {defect:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    #[error("field is not KP-admissible: the xi = 0 line carries energy {energy:.3e}")]
    NotAdmissible { energy: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("too few time samples: need at least {min}, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("degenerate frequency arguments: {0}")]
    Degenerate(String),

    #[error("point ({xi}, {eta}) lies outside the lower-bound window")]
    OutOfWindow { xi: f64, eta: f64 },

    #[error("rectangle {name} is under-resolved: {cells_x} x {cells_y} modes, need at least {min} x {min}")]
    UnderResolved {
        name: &'static str,
        cells_x: usize,
        cells_y: usize,
        min: usize,
    },

    #[error("estimate violated: numerator {numerator:.3e} with vanishing denominator")]
    EstimateViolation { numerator: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
