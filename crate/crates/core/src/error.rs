use alloc::string::String;

use thiserror::Error;

use crate::regulated::ValidationIssue;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(ValidationIssue),
    #[error("time {t} outside the grid [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
    #[error("paths are not sampled on the same grid")]
    GridMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("initial condition violated: need {lower} <= {value} <= {upper}")]
    InitialCondition { lower: f64, value: f64, upper: f64 },
    #[error("lower barrier exceeds upper barrier at t = {time}")]
    BarrierOrder { time: f64 },
    #[error("barriers not separated: margin {margin} at t = {time}")]
    BarrierSeparation { time: f64, margin: f64 },
    #[error("path jumps at t = 0")]
    JumpAtZero,
    #[error("crossing sequence failed to advance at t = {time}")]
    CrossingStalled { time: f64 },
    #[error("coefficient evaluation diverged at t = {time}")]
    Diverged { time: f64 },
    #[error(
        "Picard iteration did not converge on interval starting at t = {interval_start} \
         after {iterations} iterations (residual {residual}, contraction ratio {ratio}, budget m = {budget})"
    )]
    NonConvergence { interval_start: f64, iterations: usize, residual: f64, ratio: f64, budget: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
