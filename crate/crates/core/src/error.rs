use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Hurst parameter must lie strictly inside (1/2, 1), got {0}")]
    InvalidHurst(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: left has n = {left}, right has n = {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("quadrature did not converge to tol {tol:e} ({context}); last change {change:e}")]
    QuadratureNonConvergence { context: String, tol: f64, change: f64 },

    #[error("kernel grid invariant violated: {0}")]
    InvariantViolation(String),

    #[error("engine capacity exceeded: {0}")]
    Capacity(String),

    #[error("series coefficients `{label}` violate growth certificate at k = {k}: |a_k| = {value:e} > {bound:e}")]
    CertificateViolation {
        label: String,
        k: usize,
        value: f64,
        bound: f64,
    },

    #[error("series coefficients carry no growth certificate")]
    MissingCertificate,

    #[error("requested tail tolerance {0:e} is unreachable within the truncation limit")]
    UnreachableTail(f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("grid cache {path}: {reason}")]
    CacheFormat { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
