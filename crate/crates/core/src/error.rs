use thiserror::Error;

/// Errors raised by the lattice algebra and the reductions built on it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pointwise matrix at site {0} is singular or ill-conditioned")]
    SingularElement(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("requested {requested} eigenpairs but only {available} separated eigenvalues exist")]
    DegenerateSpectrum { requested: usize, available: usize },

    #[error("seed columns are linearly dependent at site {0}")]
    DegenerateSeed(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("forward recurrence disagrees with the top-coefficient formula (defect {defect:.3e})")]
    InconsistentRecurrence { defect: f64 },

    #[error("chain link violates its constraint (defect {defect:.3e})")]
    ChainInconsistency { defect: f64 },

    #[error("operation requires scalar fields, got dim {0}")]
    DimensionError(usize),

    #[error("denominator below floor at site {0}")]
    DenominatorUnderflow(usize),

    #[error("invalid parameter: {0}")]
    ParameterError(String),

    #[error("step count {0} exceeds the configured bound")]
    StepCountOverflow(usize),

    #[error("seed violates the Riccati relation (defect {defect:.3e})")]
    SeedInconsistent { defect: f64 },

    #[error("invalid grid: {0}")]
    GridError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
