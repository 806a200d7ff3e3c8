use thiserror::Error;

/// Failure modes of model construction and analysis.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model parameters (grid, spectra, band layout).
    #[error("model: {0}")]
    Model(String),

    /// Pump at or above oscillation threshold; no stationary state below it.
    #[error("pump ratio {0} is at or above threshold (must be < 1)")]
    AboveThreshold(f64),

    /// A covariance block failed symmetry or positive definiteness.
    #[error("covariance: {0}")]
    NotPositiveDefinite(String),

    /// State violates the uncertainty bound beyond tolerance.
    #[error("unphysical state: min symplectic eigenvalue {nu_min}")]
    Unphysical { nu_min: f64 },

    /// Malformed or incomplete measurement data.
    #[error("data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
