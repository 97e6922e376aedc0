use thiserror::Error;

/// Errors raised across the memory-space model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode grid is empty")]
    EmptyGrid,

    #[error("mode {0}: damping constant must be positive")]
    NonPositiveGamma(usize),

    #[error("mode {0}: frequency must be non-negative")]
    NegativeOmega(usize),

    #[error("mode {0}: energy must be positive")]
    NonPositiveEnergy(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("occupation of mode {0} is negative")]
    NegativeOccupation(usize),

    #[error("codes are defined on different mode grids")]
    GridMismatch,

    #[error("mode index {index} out of range for a grid of {len} modes")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("time must be finite and non-negative, got {0}")]
    InvalidTime(f64),

    #[error("squeeze parameter vanishes; inverse temperature is undefined")]
    ZeroSqueeze,

    #[error("truncation n_max = {n_max} leaves leakage {leakage:e} above tolerance {tolerance:e}")]
    TruncationTooSmall {
        n_max: usize,
        leakage: f64,
        tolerance: f64,
    },

    #[error("propagation produced a non-finite amplitude")]
    NonFiniteAmplitude,

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("sample times must be strictly increasing")]
    UnorderedTimes,

    #[error("fit window holds {got} samples, need at least {needed}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("divergence vanishes or changes sign inside the fit window")]
    WindowContainsZeroCrossing,

    #[error("association threshold must lie in (0, 1), got {0}")]
    BadThreshold(f64),

    #[error("invalid oscillator parameter `{0}`")]
    InvalidParams(&'static str),

    #[error("step size and horizon must satisfy dt > 0 and t_end >= dt")]
    InvalidStep,

    #[error("closed-form reference needs the underdamped regime")]
    Overdamped,

    #[error("trajectory left the finite range at t = {time}")]
    NonFiniteState { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
