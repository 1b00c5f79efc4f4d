use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Theorem *failures* are never errors: they are reported through the
/// verdict types. Errors are reserved for malformed inputs and for
/// violated preconditions of a verifier.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid subsystem dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subsystem index {index} out of range for {count} factors")]
    InvalidSubsystem { index: usize, count: usize },

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator does not have unit trace (trace {trace})")]
    NotUnitTrace { trace: f64 },

    #[error("operator is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },

    #[error("invalid record decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid tag specification: {0}")]
    InvalidTags(String),

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("repeatability precondition violated (residual {residual:e})")]
    RepeatabilityViolated { residual: f64 },

    #[error("chain output is not a sharp record state (product residual {residual:e})")]
    NotRecordPreserving { residual: f64 },

    #[error("mismatched chains: {0}")]
    MismatchedChains(String),

    #[error("purifier reductions differ (residual {residual:e})")]
    MismatchedPurifier { residual: f64 },

    #[error("records are not orthogonal (overlap {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("invalid mixing coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidOptimizerConfig(String),

    #[error("config field `{field}`: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
