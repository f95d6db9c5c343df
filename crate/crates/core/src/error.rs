use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("query budget of {budget} matrix-vector products exhausted")]
    BudgetExceeded { budget: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("(n - 1) = {} is not divisible by (q + 1) = {}; nearest valid n is {nearest}", .n - 1, .q + 1)]
    Divisibility { n: usize, q: usize, nearest: usize },

    #[error("monomial coefficients requested for degree {degree}, cap is {cap}")]
    DegreeTooLarge { degree: usize, cap: usize },

    #[error("Krylov matrix has numerical rank 0")]
    RankCollapse,

    #[error("vector is not unit norm (norm = {norm})")]
    NotUnit { norm: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("A^T w vanishes; the induced right vector is undefined")]
    DegenerateW,

    #[error("spectrum does not satisfy the required shape: {0}")]
    SpectrumMismatch(String),

    #[error("spectrum does not satisfy the hypothesis of case {case}: {reason}")]
    CaseMismatch { case: u8, reason: String },

    #[error("vectors are not orthogonal to the fixed subspace (residual {residual:e})")]
    NotOrthogonal { residual: f64 },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("unknown adaptive strategy '{0}'")]
    UnknownStrategy(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", .path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
