use std::path::PathBuf;

/// Errors produced by grid construction, file I/O, and the numerical pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("{path}: PGM parse error at byte {offset}: {message}")]
    PgmParse {
        path: PathBuf,
        offset: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("CFL violation: tau={tau} exceeds admissible tau_max={tau_max}")]
    CflViolation { tau: f64, tau_max: f64 },

    #[error("Gauss-Seidel did not converge: residual {residual:e} after {sweeps} sweeps")]
    GaussSeidelDiverged { residual: f64, sweeps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
