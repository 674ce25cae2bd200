use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::table::Table;

/// Kerr nonlinearity: γ(λ) = (2π/λ)·n₂(λ)/A_eff(λ), with a linear n₂ fit and a
/// tabulated effective area.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearProfile {
    /// n₂ at `n2_reference` [m²/W].
    pub n2_intercept: f64,
    /// dn₂/dλ [m²/W per m].
    pub n2_slope: f64,
    pub n2_reference: f64,
    /// Wavelength [m] → A_eff [m²], strictly increasing.
    aeff: Table,
    /// (λ_ref, γ_ref) pinning γ exactly at one wavelength.
    calibration: Option<(f64, f64)>,
    n2_scale: f64,
    /// Overrides the wavelength dependence entirely.
    constant_gamma: Option<f64>,
}

/// Step-index core used for the built-in effective-area table.
const CORE_RADIUS: f64 = 4.1e-6;
const CLADDING_INDEX: f64 = 1.444;
const RELATIVE_INDEX_DIFF: f64 = 0.0036;

/// Marcuse mode-field radius of the fundamental mode, giving A_eff = π·w².
pub fn marcuse_aeff(lambda: f64) -> f64 {
    let na = CLADDING_INDEX * (2.0 * RELATIVE_INDEX_DIFF).sqrt();
    let v = 2.0 * PI * CORE_RADIUS * na / lambda;
    let w = CORE_RADIUS * (0.65 + 1.619 * v.powf(-1.5) + 2.879 * v.powi(-6));
    PI * w * w
}

pub fn builtin_aeff_table() -> Table {
    let pts = (0..=90).map(|i| {
        let l = (1250.0 + 5.0 * i as f64) * 1e-9;
        (l, marcuse_aeff(l))
    });
    Table::new(pts.collect()).expect("builtin A_eff table")
}

pub const DEFAULT_N2: f64 = 2.6e-20;
pub const DEFAULT_N2_SLOPE: f64 = -8e-16;
pub const DEFAULT_N2_REFERENCE: f64 = 1550e-9;
/// γ = 2 W⁻¹km⁻¹ at the zero-dispersion wavelength.
pub const DEFAULT_GAMMA_CALIBRATION: (f64, f64) = (1302.3e-9, 2e-3);

impl NonlinearProfile {
    pub fn new(
        n2_intercept: f64,
        n2_slope: f64,
        n2_reference: f64,
        aeff: Table,
        calibration: Option<(f64, f64)>,
    ) -> Result<Self> {
        if !aeff.is_strictly_increasing() {
            return Err(invalid("effective area must increase strictly with wavelength"));
        }
        if aeff.ys().iter().any(|&a| a <= 0.0) {
            return Err(invalid("effective area must be positive"));
        }
        let mut p = NonlinearProfile {
            n2_intercept,
            n2_slope,
            n2_reference,
            aeff,
            calibration,
            n2_scale: 1.0,
            constant_gamma: None,
        };
        if let Some((l_ref, g_ref)) = calibration {
            if g_ref <= 0.0 {
                return Err(invalid("calibration γ must be positive"));
            }
            let raw = p.gamma_unscaled(l_ref)?;
            p.n2_scale = g_ref / raw;
        }
        for &l in p.aeff.xs() {
            if p.gamma_at(l)? <= 0.0 {
                return Err(invalid("n₂ fit gives non-positive γ inside the table"));
            }
        }
        Ok(p)
    }

    pub fn standard_smf() -> Self {
        Self::new(
            DEFAULT_N2,
            DEFAULT_N2_SLOPE,
            DEFAULT_N2_REFERENCE,
            builtin_aeff_table(),
            Some(DEFAULT_GAMMA_CALIBRATION),
        )
        .expect("builtin nonlinear profile")
    }

    /// Wavelength-independent γ [1/(W·m)]; A_eff stays available for Raman scaling.
    pub fn with_constant_gamma(mut self, gamma: f64) -> Self {
        self.constant_gamma = Some(gamma);
        self
    }

    pub fn calibration(&self) -> Option<(f64, f64)> {
        self.calibration
    }

    pub fn n2_scale(&self) -> f64 {
        self.n2_scale
    }

    pub fn aeff_table(&self) -> &Table {
        &self.aeff
    }

    pub fn n2_at(&self, lambda: f64) -> f64 {
        self.n2_scale * (self.n2_intercept + self.n2_slope * (lambda - self.n2_reference))
    }

    pub fn aeff_at(&self, lambda: f64) -> Result<f64> {
        self.aeff.eval(lambda).ok_or(Error::OutOfBand {
            lambda_nm: lambda * 1e9,
            lo_nm: self.aeff.min_x() * 1e9,
            hi_nm: self.aeff.max_x() * 1e9,
        })
    }

    fn gamma_unscaled(&self, lambda: f64) -> Result<f64> {
        let n2 = self.n2_intercept + self.n2_slope * (lambda - self.n2_reference);
        Ok(2.0 * PI / lambda * n2 / self.aeff_at(lambda)?)
    }

    /// γ(λ) [1/(W·m)].
    pub fn gamma_at(&self, lambda: f64) -> Result<f64> {
        let aeff = self.aeff_at(lambda)?;
        if let Some(g) = self.constant_gamma {
            return Ok(g);
        }
        Ok(2.0 * PI / lambda * self.n2_at(lambda) / aeff)
    }
}

/// γ(λ) for a profile.
pub fn gamma_at(profile: &NonlinearProfile, lambda: f64) -> Result<f64> {
    profile.gamma_at(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_pins_gamma_at_zero_dispersion() {
        let p = NonlinearProfile::standard_smf();
        let g = p.gamma_at(1302.3e-9).unwrap();
        assert!((g - 2e-3).abs() < 1e-15);
    }

    // Oracle: the Marcuse area and the linear n₂ form, evaluated from scratch.
    #[test]
    fn gamma_1550_regression() {
        let lam = 1550e-9_f64;
        let radius = 4.1e-6_f64;
        let na = 1.444 * (0.0072_f64).sqrt();
        let mfr = |l: f64| {
            let v = 2.0 * std::f64::consts::PI * radius * na / l;
            radius * (0.65 + 1.619 / v.powf(1.5) + 2.879 / v.powi(6))
        };
        // A_eff at 1550 nm falls on a table node; 1302.3 nm sits between 1300 and 1305 nm.
        let area = |l: f64| std::f64::consts::PI * mfr(l).powi(2);
        let a_ref = area(1300e-9) + (area(1305e-9) - area(1300e-9)) * (2.3 / 5.0);
        let n2 = |l: f64| 2.6e-20 - 8e-16 * (l - 1550e-9);
        let raw_ref = 2.0 * std::f64::consts::PI / 1302.3e-9 * n2(1302.3e-9) / a_ref;
        let scale = 2e-3 / raw_ref;
        let expected = 2.0 * std::f64::consts::PI / lam * scale * n2(lam) / area(lam);
        let got = NonlinearProfile::standard_smf().gamma_at(lam).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-12, "{got} vs {expected}");
        // Frozen: 1.5 W⁻¹km⁻¹ region for a standard fibre at 1550 nm.
        assert!((got * 1e3 - 1.3).abs() < 0.2, "{}", got * 1e3);
    }

    #[test]
    fn doubling_area_halves_gamma() {
        let t1 = Table::new(vec![(1.2e-6, 80e-12), (1.7e-6, 90e-12)]).unwrap();
        let t2 = t1.map_y(|a| 2.0 * a);
        let p1 = NonlinearProfile::new(2.6e-20, 0.0, 1.55e-6, t1, None).unwrap();
        let p2 = NonlinearProfile::new(2.6e-20, 0.0, 1.55e-6, t2, None).unwrap();
        let l = 1.5e-6;
        assert!((p1.gamma_at(l).unwrap() / p2.gamma_at(l).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn area_increases_and_non_monotone_is_rejected() {
        let p = NonlinearProfile::standard_smf();
        assert!(p.aeff_table().is_strictly_increasing());
        let a1310 = p.aeff_at(1310e-9).unwrap() * 1e12;
        let a1550 = p.aeff_at(1550e-9).unwrap() * 1e12;
        assert!(a1310 > 55.0 && a1310 < 70.0, "{a1310}");
        assert!(a1550 > 75.0 && a1550 < 90.0, "{a1550}");
        let bad = Table::new(vec![(1.2e-6, 90e-12), (1.7e-6, 80e-12)]).unwrap();
        assert!(NonlinearProfile::new(2.6e-20, 0.0, 1.55e-6, bad, None).is_err());
    }

    #[test]
    fn out_of_table_is_error() {
        assert!(NonlinearProfile::standard_smf().gamma_at(1800e-9).is_err());
    }

    #[test]
    fn evaluations_are_pure() {
        let p = NonlinearProfile::standard_smf();
        let a = p.gamma_at(1431.7e-9).unwrap();
        let b = p.gamma_at(1431.7e-9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
