use thiserror::Error;

/// Errors raised by the simulator and the Fisher-information routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    /// At least one mode must stay unphased as a reference arm.
    #[error("need d < m so that one arm stays a reference (got m = {modes}, d = {phases})")]
    ReferenceMode { modes: usize, phases: usize },

    #[error("arity mismatch: expected {expected}, got {actual}")]
    Arity { expected: usize, actual: usize },

    #[error("matrix shape error: {0}")]
    Shape(String),

    #[error("permanent of a {size}x{size} matrix exceeds the size guard of {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("photon configuration error: {0}")]
    Configuration(String),

    #[error("mode index {index} out of range for {modes} modes")]
    ModeIndex { index: usize, modes: usize },

    #[error("negative probability {value:e} for outcome {outcome}")]
    NegativeProbability { value: f64, outcome: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Every optimizer start ended on a singular Fisher matrix or a non-finite value.
    #[error("no finite optimum found over {starts} starts: {diagnostics}")]
    NoOptimum { starts: usize, diagnostics: String },
}

pub type Result<T> = std::result::Result<T, Error>;
