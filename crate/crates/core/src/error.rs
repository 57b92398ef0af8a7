use thiserror::Error;

/// Errors raised while constructing states or evaluating measures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has no amplitudes")]
    EmptyState,

    #[error("state norm {0:e} is below the 1e-12 rejection threshold")]
    ZeroNorm(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("mixer columns are not orthonormal (deviation {0:e})")]
    NonIsometricMixer(f64),

    #[error("mixer has {columns} columns but the state has rank {rank}")]
    RankMismatch { rank: usize, columns: usize },

    #[error("ensemble size {size} is smaller than the state rank {rank}")]
    EnsembleTooSmall { size: usize, rank: usize },

    #[error("expected a single-qubit state, got dimension {0}")]
    NotQubit(usize),

    #[error("Kraus operator {0} maps some basis state to a superposition")]
    CoherentKraus(usize),

    #[error("Kraus operators violate completeness (deviation {0:e})")]
    IncompleteKraus(f64),

    #[error("Kraus set is empty")]
    EmptyKraus,

    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),

    #[error("state file field `{field}`: {message}")]
    StateFile { field: String, message: String },

    #[error("dimension {dim} exceeds the supported maximum of {max}")]
    DimensionTooLarge { dim: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
