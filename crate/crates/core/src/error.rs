use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension {dim} does not factor as {n} x {m}")]
    Factorization { dim: usize, n: usize, m: usize },

    #[error("subspace does not contain the identity")]
    NotUnital,

    #[error("subspace contains the identity")]
    ContainsUnit,

    #[error("inclusion violated: residual {residual:.3e}")]
    NotContained { residual: f64 },

    #[error("map is not completely positive (min Choi eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("empty complement: the system is the full matrix algebra")]
    EmptyComplement,

    #[error("size guard: block dimension {dim} exceeds cap {cap}")]
    SizeGuard { dim: usize, cap: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
