//! Wavelength-dependent fibre parameters.

pub mod attenuation;
pub mod dispersion;
pub mod nonlinear;
pub mod raman_gain;

pub use attenuation::{attenuation_at, AttenuationProfile};
pub use dispersion::{
    beta_from_dispersion, zero_dispersion_wavelength, BetaCoefficients, DispersionFit, DispersionTable, FitOrder,
};
pub use nonlinear::{gamma_at, NonlinearProfile};
pub use raman_gain::{raman_gain_between, RamanGainCurve};

use crate::error::{invalid, Result};
use crate::units::freq_to_wavelength;

/// The physical plant: one or more identical-profile spans.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreSpec {
    /// Total length [m].
    pub length: f64,
    /// Per-span lengths [m]; sums to `length`.
    pub span_lengths: Vec<f64>,
    pub attenuation: AttenuationProfile,
    /// Taylor fit used by the NLI solvers.
    pub dispersion: DispersionFit,
    /// Tabulated profile used for zero-dispersion queries and reporting.
    pub dispersion_table: DispersionTable,
    pub nonlinear: NonlinearProfile,
    pub raman: RamanGainCurve,
}

impl FibreSpec {
    /// Single span of standard fibre with the reference-link dispersion fit.
    pub fn standard(length: f64) -> Self {
        FibreSpec {
            length,
            span_lengths: vec![length],
            attenuation: AttenuationProfile::standard_smf(),
            dispersion: DispersionFit::reference_link(),
            dispersion_table: DispersionTable::builtin(),
            nonlinear: NonlinearProfile::standard_smf(),
            raman: RamanGainCurve::silica(),
        }
    }

    pub fn with_spans(mut self, spans: Vec<f64>) -> Result<Self> {
        if spans.is_empty() || spans.iter().any(|&l| !(l > 0.0)) {
            return Err(invalid("span lengths must be positive and non-empty"));
        }
        self.length = spans.iter().sum();
        self.span_lengths = spans;
        Ok(self)
    }

    pub fn without_raman(mut self) -> Self {
        self.raman = RamanGainCurve::disabled();
        self
    }

    pub fn with_flat_attenuation(mut self, db_km: f64) -> Self {
        self.attenuation = AttenuationProfile::flat(db_km);
        self
    }

    pub fn with_constant_gamma(mut self, gamma: f64) -> Self {
        self.nonlinear = self.nonlinear.with_constant_gamma(gamma);
        self
    }

    /// Replaces the solver fit with one of the tabulated profile centred at `lambda_c`.
    pub fn with_table_fit(mut self, lambda_c: f64, order: FitOrder) -> Result<Self> {
        self.dispersion = self.dispersion_table.fit(lambda_c, order)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(invalid("fibre length must be positive"));
        }
        if self.span_lengths.is_empty() || self.span_lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(invalid("span lengths must be positive and non-empty"));
        }
        let total: f64 = self.span_lengths.iter().sum();
        if ((total - self.length) / self.length).abs() > 1e-9 {
            return Err(invalid("span lengths must sum to the fibre length"));
        }
        Ok(())
    }

    pub fn span_count(&self) -> usize {
        self.span_lengths.len()
    }

    /// α [1/m] at optical frequency `f`.
    pub fn alpha_at_freq(&self, f: f64) -> Result<f64> {
        attenuation_at(&self.attenuation, freq_to_wavelength(f))
    }

    /// γ [1/(W·m)] at optical frequency `f`.
    pub fn gamma_at_freq(&self, f: f64) -> Result<f64> {
        self.nonlinear.gamma_at(freq_to_wavelength(f))
    }

    /// A_eff [m²] at optical frequency `f`.
    pub fn aeff_at_freq(&self, f: f64) -> Result<f64> {
        self.nonlinear.aeff_at(freq_to_wavelength(f))
    }

    /// β coefficients at the fit's expansion wavelength.
    pub fn reference_betas(&self) -> Result<BetaCoefficients> {
        beta_from_dispersion(&self.dispersion, self.dispersion.lambda_c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_spec_is_valid() {
        let f = FibreSpec::standard(80e3);
        f.validate().unwrap();
        assert_eq!(f.span_count(), 1);
        assert_eq!(f.span_lengths, vec![80e3]);
    }

    #[test]
    fn spans_sum_to_length() {
        let f = FibreSpec::standard(1.0).with_spans(vec![50e3, 30e3]).unwrap();
        assert_eq!(f.length, 80e3);
        f.validate().unwrap();
        assert!(FibreSpec::standard(1.0).with_spans(vec![0.0]).is_err());
    }
}
