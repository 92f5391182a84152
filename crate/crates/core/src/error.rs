use thiserror::Error;

/// Errors raised anywhere in the workbench.
///
/// Every variant maps to a stable machine-readable [`Error::kind`] string
/// that the command-line front end emits on stderr.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("two paths map to the same angular grid cell (row {g_r}, col {g_t})")]
    DuplicateGridPoint { g_r: usize, g_t: usize },

    #[error("path {index} has an off-grid offset but synthesis is in strict-grid mode")]
    OffGridPath { index: usize },

    #[error("internal consistency check failed: {0}")]
    ConsistencyCheckFailed(String),

    #[error("exhaustive enumeration needs {required} evaluations, budget is {budget}")]
    ExhaustiveLimitExceeded { required: u128, budget: u64 },

    #[error("matrix is zero on every support; RIP constant undefined")]
    DegenerateMatrix,

    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("unsupported field extension degree t = {0} (supported: 3..=16)")]
    UnsupportedDegree(u32),

    #[error("invalid correction capability k = {k} for t = {t} (need 1 <= k < 2^(t-1))")]
    InvalidK { t: u32, k: usize },

    #[error("shortening target {target} outside [{min}, {max})")]
    TargetTooSmall {
        target: usize,
        min: usize,
        max: usize,
    },

    #[error("code designs serve different sparsity levels ({k_t} vs {k_r})")]
    SparsityMismatch { k_t: usize, k_r: usize },

    #[error("{name} = {value} out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("ambiguous sparse solution: supports {first:?} and {second:?} both fit exactly")]
    AmbiguousSolution {
        first: Vec<usize>,
        second: Vec<usize>,
    },

    #[error("malformed matrix JSON: {0}")]
    MalformedJson(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::DuplicateGridPoint { .. } => "DuplicateGridPoint",
            Error::OffGridPath { .. } => "OffGridPath",
            Error::ConsistencyCheckFailed(_) => "ConsistencyCheckFailed",
            Error::ExhaustiveLimitExceeded { .. } => "ExhaustiveLimitExceeded",
            Error::DegenerateMatrix => "DegenerateMatrix",
            Error::NonSquare { .. } => "NonSquare",
            Error::UnsupportedDegree(_) => "UnsupportedDegree",
            Error::InvalidK { .. } => "InvalidK",
            Error::TargetTooSmall { .. } => "TargetTooSmall",
            Error::SparsityMismatch { .. } => "SparsityMismatch",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::AmbiguousSolution { .. } => "AmbiguousSolution",
            Error::MalformedJson(_) => "MalformedJson",
        }
    }

    pub(crate) fn dims(
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch {
            context,
            expected: format!("{}x{}", expected.0, expected.1),
            got: format!("{}x{}", got.0, got.1),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
