use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,
    #[error("shift past end: shift {shift} on a sequence of length {len}")]
    ShiftPastEnd { shift: usize, len: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("branching number {value} at generation {generation} is below 2")]
    BranchingTooSmall { generation: usize, value: u32 },
    #[error("branching sequence has {len} entries, depth {depth} requested")]
    BranchingTooShort { len: usize, depth: usize },
    #[error("tree too large: generation sizes overflow")]
    TreeTooLarge,
    #[error("dense limit exceeded: {vertices} vertices, limit {limit}")]
    DenseLimitExceeded { vertices: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("E in spectrum of truncation (det {det:e})")]
    SingularTruncation { det: f64 },
    #[error("sequence too short: need {needed} entries, have {len}")]
    SequenceTooShort { needed: usize, len: usize },
    #[error("inverse iteration did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("odd step count {0}; the zero-energy closed form needs an even count")]
    OddStepCount(usize),
    #[error("outside asymptotic spectrum: |E| = {energy} > {edge}")]
    OutsideSpectrum { energy: f64, edge: f64 },
    #[error("insufficient decay window: {points} points")]
    InsufficientDecayWindow { points: usize },
    #[error("non-finite values in rows {0:?}")]
    NonFinite(Vec<usize>),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
