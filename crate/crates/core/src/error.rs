use thiserror::Error;

/// Errors raised by the probe engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("adaptive quadrature did not converge within {panels} panels (estimate {estimate:e}, error {error:e})")]
    NonConvergence {
        panels: usize,
        estimate: f64,
        error: f64,
    },

    #[error("speed c = {0} < 1 has no critical angle")]
    NoCriticalAngle(f64),

    #[error("angular domain end {end} reaches the critical angle {critical}")]
    DomainTouchesSingularity { end: f64, critical: f64 },

    #[error("radial weight lambda^{power} is not integrable at the origin")]
    DivergentAtOrigin { power: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("cutoff support {support} exceeds the grid Nyquist frequency {nyquist}")]
    NyquistViolation { support: f64, nyquist: f64 },

    #[error("time window [-{halfwidth}, {halfwidth}] truncates the profile (relative tail {tail:e})")]
    TimeWindowTooSmall { halfwidth: f64, tail: f64 },

    #[error("time step {step} aliases phases up to {max_phase}")]
    TimeStepTooCoarse { step: f64, max_phase: f64 },

    #[error("box half-width {halfwidth} is below {required} for this kernel")]
    BoxTooSmall { halfwidth: f64, required: f64 },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
