use thiserror::Error;

/// Errors surfaced by the library. Every variant is a precondition or shape
/// failure; "this plan does not work" is reported as `Ok(false)` / `None`
/// by the relevant operation instead.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BacError {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("field modulus {0} is too large (must be below 2^32)")]
    ModulusTooLarge(u64),

    #[error("{0} is not invertible mod {1}")]
    NotInvertible(u64, u64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field mismatch: p={0} vs p={1}")]
    FieldMismatch(u64, u64),

    #[error("symbol index {index} out of range 1..={n}")]
    SymbolOutOfRange { index: usize, n: usize },

    #[error("bucket index {index} out of range 1..={m}")]
    BucketOutOfRange { index: usize, m: usize },

    #[error("cannot partition {m} buckets into {k} non-empty recovery sets")]
    TooManyRequests { k: usize, m: usize },

    #[error("request must contain at least one symbol")]
    EmptyRequest,

    #[error("exhaustive search supports at most 64 buckets, code has {0}")]
    TooManyBuckets(usize),

    #[error("plan shape mismatch: {0}")]
    PlanShape(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("no recovery plan for request {0:?}")]
    NoPlan(Vec<usize>),

    #[error("code format: {0}")]
    Format(String),
}

pub type Result<T, E = BacError> = std::result::Result<T, E>;
