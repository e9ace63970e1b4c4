use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by state construction, numerics and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Fock cutoff {cutoff} is too small: {reason}")]
    CutoffTooSmall { cutoff: usize, reason: String },

    #[error("cutoff search exceeded {cap} levels (nu = {nu}, m = {m})")]
    CutoffSearchExhausted { nu: f64, m: usize, cap: usize },

    #[error("Laguerre degree {0} exceeds the supported maximum {max}", max = crate::special::MAX_DEGREE)]
    DegreeTooLarge(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("Wigner grid does not capture the state: boundary |W| = {boundary:.3e} vs max |W| = {max:.3e}")]
    GridTooSmall { boundary: f64, max: f64 },

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("numeric contract violated: {0}")]
    Contract(String),

    #[error("malformed density matrix file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_time(self, t: f64) -> Self {
        Error::AtTime { t, source: Box::new(self) }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
