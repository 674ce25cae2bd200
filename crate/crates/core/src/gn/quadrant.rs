use crate::error::{invalid, Result};

/// One quadrant of the recentred (f1, f2) plane in hyperbolic coordinates
/// υ1 = g1·g2, υ2 = ln√(g1/g2), with (f1, f2) = (s1·g1, s2·g2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrantDomain {
    pub kappa: u8,
    pub s1: f64,
    pub s2: f64,
    /// Upper limit of υ1.
    pub u1_max: f64,
    /// υ2 ∈ [−ln(lower/√υ1), +ln(upper/√υ1)].
    pub lower: f64,
    pub upper: f64,
}

impl QuadrantDomain {
    /// υ2 range at a given υ1.
    #[inline]
    pub fn v2_range(&self, u1: f64) -> (f64, f64) {
        let r = u1.sqrt();
        (-(self.lower / r).ln(), (self.upper / r).ln())
    }

    /// Recentred frequencies (f1, f2) of a point.
    #[inline]
    pub fn map(&self, u1: f64, u2: f64) -> (f64, f64) {
        let r = u1.sqrt();
        (self.s1 * r * u2.exp(), self.s2 * r * (-u2).exp())
    }

    /// Inverse of [`map`](Self::map) for a point inside the quadrant.
    pub fn inverse(&self, f1: f64, f2: f64) -> (f64, f64) {
        let (g1, g2) = (self.s1 * f1, self.s2 * f2);
        (g1 * g2, 0.5 * (g1 / g2).ln())
    }
}

/// Limits for quadrant `kappa` ∈ 1..=4 at channel offset `f` from the grid centre with half-band `b`.
pub fn quadrant_limits(kappa: u8, f: f64, b: f64) -> Result<QuadrantDomain> {
    if !(f.abs() < b) {
        return Err(invalid(format!("channel offset {f:.6e} Hz lies outside the half-band {b:.6e} Hz")));
    }
    let (bm, bp) = (b - f, b + f);
    let (s1, s2, lower, upper) = match kappa {
        1 => (1.0, 1.0, bm, bm),
        2 => (-1.0, 1.0, bm, bp),
        3 => (-1.0, -1.0, bp, bp),
        4 => (1.0, -1.0, bp, bm),
        _ => return Err(invalid(format!("quadrant index {kappa} not in 1..=4"))),
    };
    Ok(QuadrantDomain { kappa, s1, s2, u1_max: lower * upper, lower, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_channel_is_symmetric() {
        for k in 1..=4 {
            let q = quadrant_limits(k, 0.0, 2e12).unwrap();
            assert_eq!(q.u1_max, 4e24);
            let (lo, hi) = q.v2_range(1e22);
            assert!((lo + hi).abs() < 1e-12);
        }
    }

    #[test]
    fn first_quadrant_half_offset() {
        let q = quadrant_limits(1, 0.5e12, 1e12).unwrap();
        assert!((q.u1_max - 2.5e23).abs() < 1e8);
        let q2 = quadrant_limits(2, 0.5e12, 1e12).unwrap();
        assert!((q2.u1_max - 0.75e24).abs() < 1e8);
    }

    #[test]
    fn limits_bound_frequencies() {
        let (f, b) = (0.3e12, 1e12);
        for k in 1..=4 {
            let q = quadrant_limits(k, f, b).unwrap();
            let u1 = 0.37 * q.u1_max;
            let (lo, hi) = q.v2_range(u1);
            for u2 in [lo, hi] {
                let (f1, f2) = q.map(u1, u2);
                assert!(f1 >= -b - f - 1.0 && f1 <= b - f + 1.0);
                assert!(f2 >= -b - f - 1.0 && f2 <= b - f + 1.0);
            }
        }
    }

    #[test]
    fn rejects_out_of_band() {
        assert!(quadrant_limits(1, 1e12, 1e12).is_err());
        assert!(quadrant_limits(5, 0.0, 1e12).is_err());
    }

    #[test]
    fn map_back_identity() {
        let q = quadrant_limits(2, 1e11, 1e12).unwrap();
        let (f1, f2) = q.map(3e22, 0.4);
        let (g1, g2) = (-f1, f2);
        assert!((g1 * g2 / 3e22 - 1.0).abs() < 1e-14);
        assert!(((g1 / g2).sqrt().ln() - 0.4).abs() < 1e-14);
        let (u1, u2) = q.inverse(f1, f2);
        assert!((u1 / 3e22 - 1.0).abs() < 1e-14 && (u2 - 0.4).abs() < 1e-14);
    }
}
