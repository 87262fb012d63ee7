use thiserror::Error;

use crate::hilbert::Mode;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("space dimension {dimension} exceeds the guard of {guard}")]
    Capacity { dimension: usize, guard: usize },

    #[error("mode {0} does not exist in this space")]
    UnknownMode(Mode),

    #[error("atom index {index} out of range for a space with {count} atoms")]
    AtomOutOfRange { index: usize, count: usize },

    #[error("occupancy {occupancy} of {mode} exceeds cap {cap}")]
    OccupancyOverCap {
        mode: Mode,
        occupancy: usize,
        cap: usize,
    },

    #[error("basis state does not match the space layout: {0}")]
    StateShape(String),

    #[error("basis index {index} out of range for dimension {dimension}")]
    IndexOutOfRange { index: usize, dimension: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different spaces")]
    SpaceMismatch,

    #[error("operator is not hermitian (max |M - M†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("simplifying assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("atom map: {0}")]
    AtomMap(String),

    #[error("projector must constrain at least one subsystem")]
    EmptyProjector,

    #[error("invalid subsystem reference: {0}")]
    InvalidSubsystem(String),

    #[error("both amplitudes are zero")]
    ZeroAmplitudes,

    #[error("invalid case id {0}, expected 1..=4")]
    InvalidCase(u8),

    #[error("stage-B time tau = {tau} precedes stage-A time t = {t}")]
    TauBeforeT { t: f64, tau: f64 },

    #[error("invalid time {0}")]
    InvalidTime(f64),

    #[error("integration needs at least one step")]
    NoSteps,
}
