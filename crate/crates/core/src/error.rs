use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error(
        "matrix is not symmetric: |a[{row},{col}] - a[{col},{row}]| = {gap:e} exceeds tolerance"
    )]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("matrix is not positive definite (Cholesky factorization failed)")]
    NotPositiveDefinite,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("row {row} has zero Euclidean norm")]
    ZeroNormRow { row: usize },

    #[error("column {column} has zero second moment")]
    ZeroVarianceColumn { column: usize },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("dimension {p} exceeds the limit of {limit} for a p^2 x p^2 materialization")]
    DimensionTooLarge { p: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}x{expected}, got {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },

    #[error("degenerate denominator: E[tr(S^2)] = {expected_tr_s2} must exceed p*eta^2 = {floor}")]
    DegenerateDenominator { expected_tr_s2: f64, floor: f64 },

    #[error("need at least {needed} observations, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sample covariance has zero trace")]
    ZeroTrace,

    #[error("scenario `{scenario}`, n = {n}, trial {trial}: {source}")]
    Trial {
        scenario: String,
        n: usize,
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid scenario config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
