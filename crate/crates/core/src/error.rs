use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Parameter-regime conditions that individual computations depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `beta < (1 - beta) / (1 + (1 - beta) * lambda * delta)`, equivalently
    /// `1 > beta * (2 + alpha * lambda * delta)`.
    UltimateFaultTolerance,
    /// `1 > 2 * beta + alpha * lambda * delta`.
    RiggedFaultTolerance,
    /// `beta_bar < alpha_bar`, drift of the two-arrival rigged walk.
    TwoStepDrift,
    /// `beta_1 < alpha_0`, drift of the three-way walk.
    ThreeWayDrift,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::UltimateFaultTolerance => "1 > beta*(2 + alpha*lambda*delta)",
            Condition::RiggedFaultTolerance => "1 > 2*beta + alpha*lambda*delta",
            Condition::TwoStepDrift => "beta_bar < alpha_bar",
            Condition::ThreeWayDrift => "beta_1 < alpha_0",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("regime violation: {0} does not hold")]
    RegimeViolation(Condition),

    #[error("no convergence within {cap} terms (accumulated mass {mass})")]
    NonConvergence { cap: usize, mass: f64 },

    #[error("walk horizon too small: {truncated} of {trials} trials hit the step cap")]
    HorizonTooSmall { truncated: u64, trials: u64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
