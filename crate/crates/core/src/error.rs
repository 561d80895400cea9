use thiserror::Error;

use crate::calibrate::CalibrationResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Monte Carlo or solver settings are unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// Every violated field of an experiment spec.
    #[error("invalid experiment spec: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(
        "calibration did not converge (alpha = {}, omega* = {}, final phi = {})",
        .0.alpha, .0.omega_star, .0.final_phi.phi_hat
    )]
    Calibration(Box<CalibrationResult>),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
