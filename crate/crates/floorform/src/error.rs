use thiserror::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by precondition violations across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("argument `{0}` must be positive")]
    NotPositive(&'static str),

    #[error("{0} must be nonzero")]
    ZeroArgument(&'static str),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not squarefree")]
    NotSquarefree(u64),

    #[error("an odd prime is required, got {0}")]
    OddPrimeRequired(u64),

    #[error("{value} is not a unit modulo {p}")]
    NotAUnit { value: i64, p: u64 },

    #[error("precision {got} is below the required floor {needed}")]
    PrecisionTooLow { needed: u32, got: u32 },

    #[error("residue search space of {0} states exceeds the enumeration cap")]
    SearchCapExceeded(u128),

    #[error("{0} is not a perfect square")]
    NotASquare(u64),

    #[error("witness does not evaluate to the target")]
    InvalidWitness,

    #[error("modulus m = {0} is not supported; m >= 3 is required")]
    UnsupportedModulus(u64),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("{t} does not divide {n}")]
    NotADivisor { t: u64, n: u64 },
}
