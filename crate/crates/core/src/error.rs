use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// A chain or model configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The operation was called with a configuration of the wrong kind
    /// (for example a spin-1 builder with a spin-1/2 chain).
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    /// A site window or site set falls outside the chain.
    #[error("site selection out of range: {0}")]
    SiteRange(String),

    /// Operand dimensions are incompatible.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An operator required to be Hermitian is not.
    #[error("operator is not Hermitian (max |M - M^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    /// An operator required to be a projector is not idempotent.
    #[error("operator is not an orthogonal projector (max |P^2 - P| = {defect:e})")]
    NotProjector { defect: f64 },

    /// A state vector does not have unit norm.
    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    /// Bad arguments to a numerical routine.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Not enough data for the requested statistic or fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A numerical kernel failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
