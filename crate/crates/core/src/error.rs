use thiserror::Error;

/// Errors raised by the trajectory-distribution toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Rotation angle too close to pi for a unique principal logarithm.
    #[error("logarithm branch ambiguity: rotation angle {angle} is within 1e-6 of pi")]
    BranchAmbiguity { angle: f64 },

    #[error("degenerate time step at index {index}: zero time increment")]
    DegenerateTime { index: usize },

    #[error("degenerate trajectory: total weighted arc length is zero")]
    DegenerateTrajectory,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("inverse kinematics failed (residual {residual:e})")]
    IkFailure { residual: f64 },

    #[error("planner initialization failed at waypoint {waypoint}: {source}")]
    PlannerInit {
        waypoint: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse error classes, used by front ends to choose exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Parse,
    Math,
    Planner,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io(_) => ErrorClass::Io,
            Error::Parse { .. } | Error::Schema(_) | Error::Version { .. } => ErrorClass::Parse,
            Error::PlannerInit { .. } => ErrorClass::Planner,
            _ => ErrorClass::Math,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
