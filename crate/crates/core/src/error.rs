use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its allowed range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    /// The requested formula does not apply to the scenario; the message names
    /// the alternative to use.
    #[error("regime error: {0}")]
    Regime(&'static str),
    /// Evaluation point outside the function's domain.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// Numerical integration did not reach the requested tolerance.
    #[error("numerical integration did not converge (value {value:e}, error estimate {estimate:e})")]
    Numerical { value: f64, estimate: f64 },
    /// Requested work exceeds a hard limit.
    #[error("resource limit: {0}")]
    Resource(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, msg: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg))
    }
}
