use thiserror::Error;

/// Errors surfaced by the lattice/KdV laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0} vs {1} lattice points")]
    GridMismatch(usize, usize),

    #[error("nonzero mean: |coeff(0)| = {0:.3e}")]
    NonzeroMean(f64),

    #[error("hermitian symmetry violated: max deviation {0:.3e}")]
    SymmetryViolation(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solution blew up at step {step} (t = {t:.6})")]
    BlowUp { step: usize, t: f64 },

    #[error("vanishing denominator in multilinear form: {0}")]
    VanishingDenominator(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
