use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("frequency {frequency} Hz is not below the Nyquist limit {nyquist} Hz")]
    Alias { frequency: f64, nyquist: f64 },

    #[error("unsupported constellation order {0} (only 16-QAM is available)")]
    UnsupportedConstellation(u32),

    #[error("resolution bandwidth {rbw} Hz is finer than the record allows ({min} Hz)")]
    Resolution { rbw: f64, min: f64 },

    #[error("band [{lo}, {hi}] Hz lies outside the spectrum [{min}, {max}] Hz")]
    Range { lo: f64, hi: f64, min: f64, max: f64 },

    #[error("invalid filter specification: {0}")]
    FilterSpec(String),

    #[error("could not lock onto the QAM carrier: {0}")]
    Lock(String),

    #[error("time grids differ: {0}")]
    Grid(String),

    #[error("polarization beam combiner inputs overlap on the {0} rail")]
    RailConflict(&'static str),

    #[error("attenuation ratio {0} exceeds 1; the attenuator cannot amplify")]
    GainNotAllowed(f64),

    #[error("delay {delay} s outside the allowed range [0, {max}) s")]
    DelayRange { delay: f64, max: f64 },

    #[error("required attenuation ratio {0} exceeds 1; lower the uplink/LO modulation indices or raise the IF index")]
    AttenuatorInfeasible(f64),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("simulation error: {0}")]
    Simulation(String),

    #[error("delay scan has no clear optimum (objective spread {spread_db:.3} dB)")]
    DegenerateScan { spread_db: f64 },

    #[error("sweep axis `{0}` does not name a numeric scenario key")]
    Axis(String),

    #[error("unknown spectrum tap `{0}`")]
    Tap(String),

    #[error("invalid value for `{key}`: {reason}")]
    Validation { key: String, reason: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
