use thiserror::Error;

/// Errors raised across the modelling pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {lambda_nm:.3} nm outside the supported band [{lo_nm:.1}, {hi_nm:.1}] nm")]
    OutOfBand { lambda_nm: f64, lo_nm: f64, hi_nm: f64 },

    #[error("dispersion profile has no zero crossing in [{lo_nm:.1}, {hi_nm:.1}] nm")]
    NoZeroCrossing { lo_nm: f64, hi_nm: f64 },

    #[error("frequency {freq_hz:.6e} Hz outside the channel interpolation hull")]
    HullViolation { freq_hz: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("step size underflow at z = {z_m:.3} m (h = {step_m:.3e} m)")]
    StepUnderflow { z_m: f64, step_m: f64 },

    #[error("channel failures: {}", .0.iter().map(|(i, e)| format!("#{i}: {e}")).collect::<Vec<_>>().join("; "))]
    ChannelFailures(Vec<(usize, Error)>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error stems from user-supplied configuration rather than a solver failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidParameter(_) | Error::Io(_) | Error::Csv(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
