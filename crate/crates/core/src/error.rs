use thiserror::Error;

use crate::volterra::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation (poles, gap limits).
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller-supplied data that cannot be used (off-grid times, bad series, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// Parameter combinations rejected at construction time.
    #[error("configuration error: {0}")]
    Config(String),

    /// A quantity that has no value for the given data, e.g. the centroid of a zero spectrum.
    #[error("undefined result: {0}")]
    Undefined(String),

    /// |zeta| crossed the blow-up threshold. `partial` holds every accepted step.
    #[error("blow-up: |zeta| = {magnitude:e} exceeded the threshold at t = {time}; last valid time {last_valid}")]
    BlowUp {
        time: f64,
        last_valid: f64,
        magnitude: f64,
        partial: Box<Trajectory>,
    },

    /// The implicit corrector did not converge; a smaller step is required.
    #[error("corrector did not converge at t = {time} after {iterations} iterations (residual {residual:e}); reduce dt")]
    StepFailure {
        time: f64,
        iterations: usize,
        residual: f64,
        partial: Box<Trajectory>,
    },
}

impl Error {
    /// True for failures of the time integration (as opposed to bad input).
    pub fn is_numerical_fault(&self) -> bool {
        matches!(self, Error::BlowUp { .. } | Error::StepFailure { .. })
    }

    pub fn partial_trajectory(&self) -> Option<&Trajectory> {
        match self {
            Error::BlowUp { partial, .. } | Error::StepFailure { partial, .. } => Some(partial),
            _ => None,
        }
    }
}
