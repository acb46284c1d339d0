use thiserror::Error;

use crate::cli_io::config::ConfigError;

pub type Result<T, E = BmlError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BmlError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vorticity mean {mean:e} exceeds tolerance {tolerance:e}")]
    NonZeroMean { mean: f64, tolerance: f64 },

    #[error("velocity divergence {divergence:e} exceeds tolerance {tolerance:e}")]
    DivergenceViolation { divergence: f64, tolerance: f64 },

    #[error("mollifier radius {radius:e} is below three grid cells ({cell:e}); refine the grid or lower n")]
    UnderResolvedMollifier { radius: f64, cell: f64 },

    #[error("point ({x}, {y}) left the safety margin of the box [-{half_length}, {half_length})")]
    OutsideBox { x: f64, y: f64, half_length: f64 },

    #[error("time {t} is outside the velocity timeline [{start}, {end}]")]
    OutsideTimeline { t: f64, start: f64, end: f64 },

    #[error("integrated smallness {smallness} exceeds 1/2; shorten the time window")]
    SmallnessViolated { smallness: f64 },

    #[error("mismatched timelines: {0}")]
    MismatchedTimeline(String),

    #[error("CFL condition still violated after {halvings} halvings (dt = {dt:e}, |v|max = {vmax:e})")]
    Cfl { halvings: u32, dt: f64, vmax: f64 },

    #[error("numerical abort at t = {t}: {reason}")]
    NumericalAbort {
        t: f64,
        reason: String,
        last_valid: Box<crate::solver::SolverState>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BmlError {
    /// Process exit status for the command-line tool: 2 for bad input or
    /// configuration, 4 for a numerical abort, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            BmlError::Config(_)
            | BmlError::InvalidParameter { .. }
            | BmlError::InvalidGrid(_)
            | BmlError::UnderResolvedMollifier { .. }
            | BmlError::InvalidInput(_)
            | BmlError::Format { .. } => 2,
            BmlError::NumericalAbort { .. } | BmlError::Cfl { .. } | BmlError::NonFinite(_) => 4,
            _ => 1,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        BmlError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
