use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{qubits} qubits exceeds the dense limit of {max}")]
    DimensionOverflow { qubits: usize, max: usize },

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("eigenphase {phase:.6} lies on the principal-branch cut at ±π")]
    BranchCut { phase: f64 },

    #[error("qubit count {0} must be even")]
    OddQubitCount(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate ground level (gap {gap:.3e}) at s = {s}")]
    Degenerate { s: f64, gap: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrator exceeded the step cap of {0}")]
    StepCapExceeded(usize),

    #[error("state is not a valid {kind}: {reason}")]
    InvalidState { kind: &'static str, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
