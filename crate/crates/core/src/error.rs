use thiserror::Error;

/// Errors raised by model construction, sampling and sweeps.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),

    #[error("weights must be non-negative and finite, got {0}")]
    InvalidWeight(f64),

    #[error("mixture weights sum to {0}, expected 1")]
    Unnormalized(f64),

    #[error("got {settings} settings but {weights} weights")]
    LengthMismatch { settings: usize, weights: usize },

    #[error("at least one setting is required")]
    NoSettings,

    #[error("probability {name} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("switching frequency must be finite and >= 0, got {0} Hz")]
    InvalidFrequency(f64),

    #[error("round-trip time must be finite and > 0, got {0} s")]
    InvalidRoundTrip(f64),

    #[error("duration must be finite and > 0, got {0} s")]
    InvalidDuration(f64),

    #[error("emission rate must be finite and > 0, got {0} Hz")]
    InvalidRate(f64),

    #[error("no trials requested")]
    NoTrials,

    #[error("no records for setting pair ({a:.6}, {b:.6})")]
    EmptySettingPair { a: f64, b: f64 },

    #[error("zero normalization count for {0}")]
    ZeroNormalization(&'static str),

    #[error("the two settings of a station must differ to attribute records")]
    AmbiguousSettings,

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("need at least 3 points to locate extrema, got {0}")]
    TooFewPoints(usize),

    #[error("sweep point x = {x}: {source}")]
    SweepPoint { x: f64, source: Box<Error> },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::ProbabilityOutOfRange { name, value })
    }
}
