use thiserror::Error;

use crate::evolve::Trajectory;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error in {param}: {reason}")]
    Domain { param: &'static str, reason: String },

    /// Two fields that must share a grid (and time) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A solution family cannot be checked against the requested equation.
    #[error("incompatible pairing: {0}")]
    Incompatible(String),

    /// Configuration failed validation.
    #[error("invalid configuration: {param}: {reason}")]
    Config { param: String, reason: String },

    /// Time stepping produced a non-finite value. Carries everything computed
    /// up to the last valid step.
    #[error("numerical abort at t = {time} (step {step}): {reason}")]
    NumericalAbort {
        time: f64,
        step: usize,
        reason: String,
        partial: Box<Trajectory>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        param,
        reason: reason.into(),
    }
}

pub(crate) fn config(param: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Config {
        param: param.into(),
        reason: reason.into(),
    }
}
