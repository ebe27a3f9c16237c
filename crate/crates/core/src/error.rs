use num_bigint::BigUint;
use thiserror::Error;

/// Errors surfaced by the library. Internal mathematical guarantees
/// (divisibility in the snake construction, invertibility of lifted bases)
/// are asserted, not surfaced.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime {0} is too large; primes must be below 2^20")]
    PrimeTooLarge(u64),

    #[error("entry {value} is out of range for modulus {modulus}")]
    EntryOutOfRange { value: u64, modulus: u64 },

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {got}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        got: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("enumeration of {required} elements exceeds the budget of {budget}")]
    BudgetExceeded { required: BigUint, budget: u64 },

    #[error("matrix does not reduce to the expected map mod p")]
    ReductionMismatch,

    #[error("matrix does not reduce to zero mod p")]
    NonzeroReduction,

    #[error("kernel dimension {k} is infeasible for a {m}x{n} map (need {min} <= k <= {n})", min = if *n > *m { n - m } else { 0 })]
    InfeasibleKernelDim { k: usize, m: usize, n: usize },

    #[error("Bockstein matrices are bound to different maps (digest mismatch)")]
    DigestMismatch,

    #[error("at least one trial is required")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
