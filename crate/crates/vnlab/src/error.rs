//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("function undefined on retained eigenvalue {0}")]
    DomainError(f64),
    #[error("not a subalgebra: {0}")]
    NotSubalgebra(String),
    #[error("block decomposition failed after {0} retries")]
    DecompositionFailed(usize),
    #[error("algebras are not nested as required: {0}")]
    NotNested(String),
    #[error("not a commuting square (residual {0:.3e})")]
    NotCommutingSquare(f64),
    #[error("not a co-commuting square (residual {0:.3e})")]
    NotCoCommuting(f64),
    #[error("ambient algebra is not a factor (center dimension {0})")]
    NotFactor(usize),
    #[error("bases are not mutually unbiased (worst overlap deviation {0:.3e})")]
    NotUnbiased(f64),
    #[error("{0} is not prime")]
    NotPrime(usize),
    #[error("default state maps to a rank-deficient output")]
    SingularDefault,
    #[error("operation step {step} rejected: {reason}")]
    StepRejected { step: usize, reason: String },
    #[error("unitary {0} does not commute with the square's conditional expectations")]
    NotCovariant(usize),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("intersection of the two algebras is not trivial (dimension {0})")]
    NontrivialIntersection(usize),
    #[error("no constructive witness for largest block dimension {0}")]
    WitnessUnavailable(usize),
    #[error("malformed controlled gate: {0}")]
    MalformedGate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
