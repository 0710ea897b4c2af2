use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coherent state |{amplitude}> needs more than {truncation} photons: tail mass {tail:e} exceeds {tolerance:e}")]
    TruncationTooSmall {
        amplitude: String,
        truncation: usize,
        tail: f64,
        tolerance: f64,
    },

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("initial state is not an atomic superposition times coherent fields")]
    UnsupportedInitialState,

    #[error("invalid scenario: {0}")]
    Config(String),

    #[error("integrator step underflow at t = {t} us: {reason}")]
    StepUnderflow { t: f64, reason: String },

    #[error("layout mismatch: {0}")]
    Layout(String),
}
