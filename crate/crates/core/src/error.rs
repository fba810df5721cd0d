use thiserror::Error;

/// Errors shared across the numeric, coding and regression modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("target distortion {distortion:e} outside (0, {max:e}]")]
    DistortionOutOfRange { distortion: f64, max: f64 },

    #[error("rate {rate} bits exceeds the {max}-bit per-dimension limit")]
    RateTooLarge { rate: u32, max: u32 },

    #[error("corrupt index {index} for dimension {dim} (limit {limit})")]
    CorruptIndex { dim: usize, index: u32, limit: u32 },

    #[error("payload truncated: expected {expected} bytes, got {got}")]
    TruncatedPayload { expected: usize, got: usize },

    #[error("cannot reduce to {requested} dimensions from {dim}")]
    BadTargetDim { requested: usize, dim: usize },

    #[error("linear system is singular even after jitter")]
    SingularSystem,

    #[error("objective became non-finite during optimization")]
    NonFinite,

    #[error("targets have zero variance")]
    DegenerateTargets,

    #[error("anchor block is singular")]
    SingularAnchor,

    #[error("fused precision is not positive")]
    DegeneratePrecision,

    #[error("hyperparameter {name} = {value} out of range")]
    InvalidHyperparameter { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
