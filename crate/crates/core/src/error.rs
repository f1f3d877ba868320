use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("extension degree {0} out of range (1..=16)")]
    DegreeOutOfRange(u32),

    #[error("field of order {q}^{n} exceeds the supported size")]
    FieldTooLarge { q: u32, n: u32 },

    #[error("modulus polynomial is not a monic irreducible of degree {0}")]
    ReducibleModulus(u32),

    #[error("field elements belong to different fields")]
    FieldMismatch,

    #[error("invalid field element: {0}")]
    InvalidElement(String),

    #[error("invalid hash family: {0}")]
    InvalidFamily(String),

    #[error("seed {seed} out of range (seed space has {size} seeds)")]
    SeedOutOfRange { seed: u64, size: u64 },

    #[error("evaluation budget exceeded: need {needed} evaluations, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("distributions have different support sizes: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("invalid order alpha = {0}")]
    InvalidAlpha(String),

    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),

    #[error("invalid source: {0}")]
    InvalidSource(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
