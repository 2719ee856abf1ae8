use thiserror::Error;

/// Errors produced by sampling, co-clustering and risk computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("infeasible class counts: {0}")]
    Infeasible(String),

    #[error(
        "quadrature did not converge: tol {tol:e}, error estimate {achieved:e} after {panels} panels"
    )]
    Quadrature { tol: f64, achieved: f64, panels: usize },

    #[error("exact enumeration size cap exceeded: {0}")]
    SizeCap(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("divergent KL: {0}")]
    DivergentKl(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
