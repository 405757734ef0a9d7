use thiserror::Error;

use crate::hardy::NormEstimate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("series has zero constant term")]
    ZeroConstantTerm,

    #[error("constant term {re} + {im}i is not real positive; no branch of the power is selected")]
    NonPositiveConstantTerm { re: f64, im: f64 },

    #[error("polynomial degree {degree} exceeds {max}")]
    DegreeTooHigh { degree: usize, max: usize },

    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance (best estimate {} at N = {}, last difference {})", best.value, best.samples, best.err_estimate)]
    NoConvergence { best: NormEstimate },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("trigonometric polynomial is negative (minimum {min} on the check grid)")]
    NotNonnegative { min: f64 },

    #[error("roots could not be matched into reflection pairs: {0}")]
    PairingFailure(String),

    #[error("candidate no longer solves the flip equation (residual {residual:e})")]
    StaleCandidate { residual: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}
