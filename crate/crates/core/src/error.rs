use thiserror::Error;

use crate::dynamics::PhasePoint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("oscillator level {0} is not tabulated (max 10)")]
    UnsupportedLevel(u32),

    #[error("evaluation within {distance:.3e} of a node at axis {axis}, coordinate {node}")]
    NodeEvaluation { axis: usize, node: f64, distance: f64 },

    #[error("numeric field cannot be evaluated off the real axis (imaginary part {0:.3e})")]
    OffAxisEvaluation(f64),

    #[error("point {0} lies outside the grid interior")]
    OutsideGrid(f64),

    #[error("curl needs at least two dimensions, field has {0}")]
    DimensionTooLow(usize),

    #[error("region is empty")]
    EmptyRegion,

    #[error("path segment {segment} passes within node guard of axis {axis} node at {node}")]
    PathThroughNode { segment: usize, axis: usize, node: f64 },

    #[error("trajectory halted near a singularity at t = {}", last.t)]
    TrajectoryNearSingularity { last: Box<PhasePoint> },

    #[error("field could not be evaluated along the trajectory at t = {t}")]
    FieldUnavailable { t: f64 },

    #[error("adaptive step fell below dt_min at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("square-root branch is ambiguous: u(t) passes within {min_abs:.3e} of zero")]
    BranchAmbiguity { min_abs: f64 },

    #[error("sampling region overlaps the singularity at axis {axis}, coordinate {node}")]
    RegionOverlapsSingularity { axis: usize, node: f64 },

    #[error("time {t} outside evolved range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("distribution has zero mass")]
    ZeroMass,

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("sample times are not uniformly spaced (index {index})")]
    NonuniformSampling { index: usize },

    #[error("momentum component {component} of electron {electron} is within guard of zero at sample {sample}")]
    ComponentNearZero { electron: usize, component: usize, sample: usize },

    #[error("momentum matrix for component {component} is singular")]
    SingularMomentumMatrix { component: usize },

    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("series is empty")]
    EmptySeries,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
