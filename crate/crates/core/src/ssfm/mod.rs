//! Dual-polarisation split-step Fourier reference simulator (Manakov model).
//!
//! Fields are stored as time samples with the synthesis convention A(t) = Σ Ã_k·e^{+j2πf_k t},
//! so bin k sits at `centre_freq + f_k`. Propagation follows dÃ/dz = (−α/2 − jβ(Ω))Ã and
//! A ← A·e^{−j(8/9)γ(|A_x|² + |A_y|²)h}.

mod propagate;
mod receiver;
mod waveform;

pub use propagate::{propagate, LinearOperator, PropagationStats};
pub use receiver::extract_eta;
pub use waveform::{channel_powers, generate_waveform, power_spectrum, rrc_response, TxReference, Waveform};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fibre::BetaCoefficients;

#[derive(Debug, Clone, PartialEq)]
pub struct SsfmConfig {
    /// Symbols per channel per polarisation; a power of two.
    pub symbols_per_channel: usize,
    /// Samples per symbol of the simulated band, scaled by the channel-slot count
    /// rounded up to a power of two.
    pub samples_per_symbol: usize,
    pub rolloff: f64,
    /// δ_G of the local-error step controller.
    pub goal_local_error: f64,
    pub rng_seed: u64,
    pub include_isrs: bool,
    /// Fixed number of symmetric steps instead of local-error control.
    pub fixed_steps: Option<usize>,
    /// Dispersion override; the fibre's reference fit is used otherwise.
    pub betas: Option<BetaCoefficients>,
    /// Smallest accepted step [m].
    pub min_step: f64,
}

impl Default for SsfmConfig {
    fn default() -> Self {
        SsfmConfig {
            symbols_per_channel: 1 << 14,
            samples_per_symbol: 2,
            rolloff: 0.01,
            goal_local_error: 1e-6,
            rng_seed: 1,
            include_isrs: false,
            fixed_steps: None,
            betas: None,
            min_step: 1e-3,
        }
    }
}

impl SsfmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_symbol < 2 || !self.samples_per_symbol.is_power_of_two() {
            return Err(invalid("samples per symbol must be a power of two of at least 2"));
        }
        if !self.symbols_per_channel.is_power_of_two() || self.symbols_per_channel < 16 {
            return Err(invalid("symbols per channel must be a power of two of at least 16"));
        }
        if !(self.rolloff > 0.0 && self.rolloff <= 1.0) {
            return Err(invalid("roll-off must lie in (0, 1]"));
        }
        if !(self.goal_local_error > 0.0) {
            return Err(invalid("goal local error must be positive"));
        }
        if self.fixed_steps == Some(0) {
            return Err(invalid("fixed step count must be positive"));
        }
        if !(self.min_step > 0.0) {
            return Err(invalid("minimum step must be positive"));
        }
        Ok(())
    }
}

/// Sampled dual-polarisation field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub sample_rate: f64,
    /// Optical frequency of bin 0 [Hz].
    pub centre_freq: f64,
    /// Distance propagated so far [m].
    pub z: f64,
    /// Absolute channel centres and their bin offsets, for ISRS and reception.
    pub channel_freqs: Vec<f64>,
    pub channel_bins: Vec<i64>,
}

impl FieldState {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>, sample_rate: f64, centre_freq: f64) -> Result<Self> {
        let s = FieldState { x, y, sample_rate, centre_freq, z: 0.0, channel_freqs: vec![], channel_bins: vec![] };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Frequency resolution [Hz].
    pub fn bin_width(&self) -> f64 {
        self.sample_rate / self.len() as f64
    }

    /// Mean total power over both polarisations [W].
    pub fn power(&self) -> f64 {
        let e: f64 = self.x.iter().chain(&self.y).map(|v| v.norm_sqr()).sum();
        e / self.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() || !self.x.len().is_power_of_two() || self.x.len() < 2 {
            return Err(invalid("field arrays must have equal power-of-two lengths"));
        }
        if !(self.sample_rate > 0.0) {
            return Err(invalid("sample rate must be positive"));
        }
        if self.x.iter().chain(&self.y).any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("field samples".into()));
        }
        Ok(())
    }
}

/// Signed frequency offset of DFT bin `k` out of `n`.
#[inline]
pub(crate) fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[inline]
pub(crate) fn wrap_bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}
