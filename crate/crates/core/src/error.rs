use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock cutoff must be at least 1 (got {0})")]
    InvalidCutoff(usize),

    #[error("thermal occupation must be non-negative (got {0})")]
    NegativeOccupation(f64),

    #[error("Fock level {level} outside the truncated basis 0..={cutoff}")]
    LevelOutOfRange { level: usize, cutoff: usize },

    #[error("coherent amplitude |alpha|^2 = {norm_sqr} exceeds the safe bound cutoff/4 = {bound}")]
    TruncationUnsafe { norm_sqr: f64, bound: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("tensor-product dimension {dim} exceeds the limit {limit}")]
    DimensionLimit { dim: usize, limit: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("temperature must be positive (got {0} K)")]
    NonPositiveTemperature(f64),

    #[error("trace drift {drift:.3e} at t = {t_ms:.6e} ms exceeds tolerance {tolerance:.1e}; reduce dt or raise the cutoff")]
    TraceDrift { t_ms: f64, drift: f64, tolerance: f64 },

    #[error("norm drift {drift:.3e} in one step at t = {t_ms:.6e} ms exceeds {tolerance:.1e}")]
    NormDrift { t_ms: f64, drift: f64, tolerance: f64 },

    #[error("need at least {needed} samples with defined g2(0), found {found}")]
    InsufficientSamples { needed: usize, found: usize },
}
