use crate::error::Result;
use crate::table::Table;

/// Raman gain efficiency g_r(Δf) [1/(W·m)] measured at a reference effective area.
#[derive(Debug, Clone, PartialEq)]
pub struct RamanGainCurve {
    /// Frequency separation [Hz] → gain [1/(W·m)]; zero outside the table.
    pub table: Table,
    pub aeff_reference: f64,
}

pub const SILICA_PEAK_SHIFT: f64 = 13.2e12;
pub const SILICA_CUTOFF: f64 = 30e12;
/// 0.39 W⁻¹km⁻¹.
pub const SILICA_PEAK_GAIN: f64 = 0.39e-3;
pub const SILICA_REFERENCE_AEFF: f64 = 80e-12;

impl RamanGainCurve {
    pub fn new(table: Table, aeff_reference: f64) -> Self {
        RamanGainCurve { table, aeff_reference }
    }

    /// Triangular approximation of the silica gain spectrum.
    pub fn triangular(peak_gain: f64, peak_shift: f64, cutoff: f64, aeff_reference: f64) -> Result<Self> {
        let table = Table::new(vec![(0.0, 0.0), (peak_shift, peak_gain), (cutoff, 0.0)])?;
        Ok(RamanGainCurve { table, aeff_reference })
    }

    pub fn silica() -> Self {
        Self::triangular(SILICA_PEAK_GAIN, SILICA_PEAK_SHIFT, SILICA_CUTOFF, SILICA_REFERENCE_AEFF)
            .expect("builtin Raman curve")
    }

    /// No Raman coupling at all.
    pub fn disabled() -> Self {
        RamanGainCurve {
            table: Table::new(vec![(0.0, 0.0), (SILICA_CUTOFF, 0.0)]).unwrap(),
            aeff_reference: SILICA_REFERENCE_AEFF,
        }
    }

    pub fn is_disabled(&self) -> bool {
        self.table.ys().iter().all(|&g| g == 0.0)
    }

    /// g_r(|Δf|) at the reference area.
    pub fn gain(&self, delta_f: f64) -> f64 {
        self.table.eval(delta_f.abs()).unwrap_or(0.0)
    }

    /// Slope of the gain curve at the origin [1/(W·m·Hz)], used for linear-tilt models.
    pub fn initial_slope(&self) -> f64 {
        let (x, y) = (self.table.xs(), self.table.ys());
        (y[1] - y[0]) / (x[1] - x[0])
    }
}

/// Gain coupling between a pump and a signal frequency, scaled to the signal's effective area.
pub fn raman_gain_between(curve: &RamanGainCurve, f_pump: f64, f_signal: f64, aeff_signal: f64) -> f64 {
    curve.gain(f_pump - f_signal) * curve.aeff_reference / aeff_signal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_at_origin_and_peak() {
        let c = RamanGainCurve::silica();
        let a = c.aeff_reference;
        assert_eq!(raman_gain_between(&c, 200e12, 200e12, a), 0.0);
        assert_eq!(raman_gain_between(&c, 213.2e12, 200e12, a), SILICA_PEAK_GAIN);
        assert_eq!(raman_gain_between(&c, 240e12, 200e12, a), 0.0);
    }

    #[test]
    fn inverse_area_scaling() {
        let c = RamanGainCurve::silica();
        let g1 = raman_gain_between(&c, 210e12, 200e12, c.aeff_reference);
        let g2 = raman_gain_between(&c, 210e12, 200e12, 2.0 * c.aeff_reference);
        assert!((g1 / g2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn disabled_curve_is_zero() {
        let c = RamanGainCurve::disabled();
        assert!(c.is_disabled());
        assert_eq!(c.gain(13.2e12), 0.0);
    }
}
