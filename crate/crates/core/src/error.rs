use thiserror::Error;

/// Errors raised by the matrix kernels, model builders, QUBO encoding and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("zero-norm state")]
    ZeroNorm,

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("instance too large for exhaustive search: {n_vars} variables (limit {limit})")]
    TooLarge { n_vars: usize, limit: usize },

    #[error("empty QUBO instance")]
    EmptyInstance,

    #[error("every read decoded to the null vector at zoom step {zoom}; try a larger eta")]
    NullSolution { zoom: u32 },

    #[error("time slice {slice} has near-zero norm ({norm:.3e}); the clock solve failed")]
    DegenerateSlice { slice: usize, norm: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
