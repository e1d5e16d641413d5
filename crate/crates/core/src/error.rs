use thiserror::Error;

/// Errors surfaced by the library's fallible entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sparsity level s = {s} out of range: expected 1 <= s <= {n}")]
    InvalidSparsity { s: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    #[error("non-finite entry encountered in {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("ground truth has zero norm; relative error is undefined")]
    ZeroGroundTruth,

    #[error(
        "C({n}, {s}) = {count} support sets exceed the enumeration guard of {limit}; \
         sample supports instead of enumerating"
    )]
    CombinatorialGuard {
        n: usize,
        s: usize,
        count: u128,
        limit: u128,
    },

    #[error("unknown algorithm name '{0}'")]
    UnknownAlgorithm(String),
}

pub type Result<T> = std::result::Result<T, Error>;
