use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Power is below the levitation threshold; `discriminant` is the
    /// (negative) value under the square root of the closed-form solution.
    #[error("no real steady state at p_tilde = {p_tilde:e} (discriminant = {discriminant:e})")]
    NoRealSteadyState { discriminant: f64, p_tilde: f64 },

    #[error("threshold power not found in (0, 1]: {0}")]
    ThresholdNotFound(String),

    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,

    #[error("transfer matrix singular or ill-conditioned at omega = {omega:e} rad/s (condition ~ {condition:e})")]
    IllConditioned { omega: f64, condition: f64 },

    #[error("internal consistency violated: {what} (deviation {deviation:e})")]
    Consistency { what: &'static str, deviation: f64 },

    #[error("unphysical state: det(2 sigma) = {det:e} < 1")]
    UnphysicalState { det: f64 },

    #[error("invalid sweep configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
