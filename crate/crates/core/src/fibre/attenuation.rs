use crate::error::{invalid, Error, Result};
use crate::table::Table;
use crate::units::{db_per_km_to_per_m, BAND_MAX_M, BAND_MIN_M};

/// Rayleigh scattering plus infrared absorption, α_dB(λ) = C_R/λ⁴ + A_IR·exp(−λ_IR/λ),
/// optionally replaced by a tabulated profile.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationProfile {
    /// dB/km · m⁴
    pub rayleigh_coeff: f64,
    /// dB/km
    pub ir_amplitude: f64,
    /// m
    pub ir_decay: f64,
    /// Wavelength [m] → α [dB/km]; takes precedence when present.
    pub table: Option<Table>,
}

/// Infrared absorption edge of silica.
pub const SILICA_IR_DECAY: f64 = 48.48e-6;

impl AttenuationProfile {
    /// Solves for C_R and A_IR so the profile passes through two (λ, α_dB) anchors.
    pub fn through_anchors(a: (f64, f64), b: (f64, f64), ir_decay: f64) -> Result<Self> {
        let row = |l: f64| (l.powi(-4), (-ir_decay / l).exp());
        let (a11, a12) = row(a.0);
        let (a21, a22) = row(b.0);
        let det = a11 * a22 - a12 * a21;
        if det.abs() < 1e-300 {
            return Err(invalid("degenerate attenuation anchors"));
        }
        let rayleigh_coeff = (a.1 * a22 - a12 * b.1) / det;
        let ir_amplitude = (a11 * b.1 - a21 * a.1) / det;
        if rayleigh_coeff <= 0.0 || ir_amplitude < 0.0 {
            return Err(invalid("attenuation anchors give a non-physical profile"));
        }
        Ok(AttenuationProfile { rayleigh_coeff, ir_amplitude, ir_decay, table: None })
    }

    /// Standard single-mode fibre: 0.32 dB/km at 1310 nm and 0.19 dB/km at 1550 nm.
    pub fn standard_smf() -> Self {
        Self::through_anchors((1310e-9, 0.32), (1550e-9, 0.19), SILICA_IR_DECAY)
            .expect("builtin attenuation anchors")
    }

    /// Wavelength-independent loss, expressed as a two-point table over the supported band.
    pub fn flat(alpha_db_km: f64) -> Self {
        let table = Table::new(vec![(BAND_MIN_M, alpha_db_km), (BAND_MAX_M, alpha_db_km)]).unwrap();
        AttenuationProfile { rayleigh_coeff: 0.0, ir_amplitude: 0.0, ir_decay: SILICA_IR_DECAY, table: Some(table) }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    fn analytic_db_km(&self, lambda: f64) -> f64 {
        self.rayleigh_coeff / lambda.powi(4) + self.ir_amplitude * (-self.ir_decay / lambda).exp()
    }

    /// α in dB/km, clamped to the band edges outside the supported window.
    pub fn db_km_clamped(&self, lambda: f64) -> f64 {
        let l = lambda.clamp(BAND_MIN_M, BAND_MAX_M);
        match &self.table {
            Some(t) => t.eval_clamped(l),
            None => self.analytic_db_km(l),
        }
    }

    /// α in dB/km.
    pub fn db_km(&self, lambda: f64) -> Result<f64> {
        check_band(lambda)?;
        Ok(self.db_km_clamped(lambda))
    }
}

pub(crate) fn check_band(lambda: f64) -> Result<()> {
    // Half a picometre of slack absorbs round-off in λ = c/f conversions at the edges.
    if lambda < BAND_MIN_M - 5e-13 || lambda > BAND_MAX_M + 5e-13 || !lambda.is_finite() {
        return Err(Error::OutOfBand { lambda_nm: lambda * 1e9, lo_nm: BAND_MIN_M * 1e9, hi_nm: BAND_MAX_M * 1e9 });
    }
    Ok(())
}

/// Linear power attenuation α [1/m] at `lambda`.
pub fn attenuation_at(profile: &AttenuationProfile, lambda: f64) -> Result<f64> {
    profile.db_km(lambda).map(db_per_km_to_per_m)
}
