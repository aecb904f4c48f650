//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field order {q} exceeds the cap of {cap}")]
    TooLarge { q: u128, cap: u64 },
    #[error("division by zero in the field")]
    DivisionByZero,
    #[error("degree bound r={r} is outside 1..={max} for a field of order {q}")]
    InvalidDegree { r: usize, max: usize, q: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty matrix list")]
    EmptyList,
    #[error("no Hadamard matrix of order {0} in the Sylvester family (order must be a power of two)")]
    UnsupportedOrder(usize),
    #[error("matrix is not unitary within tolerance {tol} (max deviation {dev})")]
    NotUnitary { tol: f64, dev: f64 },
    #[error("coherence needs at least two columns, got {0}")]
    TooFewColumns(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("sparsity list is not sorted ascending")]
    NotSorted,
    #[error("s1={s1} exceeds s2={s2}; expected s1 <= s2")]
    BadOrder { s1: u64, s2: u64 },
    #[error("invalid sparsity {s} for signal length {len}")]
    InvalidSparsity { s: usize, len: usize },
    #[error("support submatrix is numerically rank-deficient (singular value ratio {ratio:.3e})")]
    SingularSupport { ratio: f64 },
    #[error("signal has zero norm")]
    ZeroSignal,
    #[error("dense matrix of {entries} entries exceeds the cap of {cap}")]
    DenseTooLarge { entries: u128, cap: u64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 parameter violation, 3 I/O, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Parse(_) => 3,
            Error::NumericalFailure(_)
            | Error::SingularSupport { .. }
            | Error::DivisionByZero
            | Error::ZeroSignal => 4,
            _ => 2,
        }
    }
}
