mod common;

use common::hyperbolic_vs_cartesian as compare;
use proptest::prelude::*;
use uwb_nli::fibre::BetaCoefficients;
use uwb_nli::gn::{phase_mismatch, quadrant_limits};
use uwb_nli::units::{wavelength_to_freq, PS2_KM, PS3_KM};

#[test]
fn hyperbolic_sum_matches_cartesian_with_third_order_dispersion() {
    let betas = BetaCoefficients { beta2: -21.0 * PS2_KM, beta3: 0.5 * PS3_KM, beta4: 0.0, at_wavelength: 1550e-9 };
    // Offset from the expansion point so the β₃ term changes φ by tens of percent.
    let centre = wavelength_to_freq(1550e-9) + 5e12;
    let err = compare(2, centre, betas, 300);
    for (i, e) in err.iter().enumerate() {
        assert!(e.abs() < 0.05, "channel {i}: {e} dB");
    }
}

#[test]
fn single_channel_matches_cartesian() {
    let betas = BetaCoefficients { beta2: -21.0 * PS2_KM, beta3: 0.0, beta4: 0.0, at_wavelength: 1550e-9 };
    let err = compare(1, wavelength_to_freq(1550e-9), betas, 150);
    assert!(err[0].abs() < 0.05, "{} dB", err[0]);
}

proptest! {
    #[test]
    fn hyperbolic_map_has_unit_jacobian(
        kappa in 1u8..=4,
        f_rel in -0.9f64..0.9,
        t1 in 0.05f64..0.95,
        t2 in 0.05f64..0.95,
    ) {
        let b = 1e12;
        let q = quadrant_limits(kappa, f_rel * b, b).unwrap();
        let u1 = t1 * q.u1_max;
        let (lo, hi) = q.v2_range(u1);
        let u2 = lo + t2 * (hi - lo);
        let (h1, h2) = (1e-5 * u1, 1e-5);
        let d = |a: (f64, f64), b: (f64, f64), h: f64| ((a.0 - b.0) / (2.0 * h), (a.1 - b.1) / (2.0 * h));
        let (a11, a21) = d(q.map(u1 + h1, u2), q.map(u1 - h1, u2), h1);
        let (a12, a22) = d(q.map(u1, u2 + h2), q.map(u1, u2 - h2), h2);
        let det = (a11 * a22 - a12 * a21).abs();
        prop_assert!((det - 1.0).abs() < 1e-8, "det {}", det);
        let (f1, f2) = q.map(u1, u2);
        prop_assert!(f1 * q.s1 >= 0.0 && f2 * q.s2 >= 0.0);
        let (v1, v2) = q.inverse(f1, f2);
        prop_assert!((v1 / u1 - 1.0).abs() < 1e-12);
        prop_assert!((v2 - u2).abs() < 1e-9);
    }

    #[test]
    fn phase_is_symmetric_in_the_interferers(
        f1 in -5e12f64..5e12,
        f2 in -5e12f64..5e12,
        fi in -20e12f64..20e12,
        b2 in -30.0f64..5.0,
        b3 in -0.2f64..0.2,
        b4 in -1e-3f64..1e-3,
    ) {
        let betas = BetaCoefficients {
            beta2: b2 * PS2_KM, beta3: b3 * PS3_KM, beta4: b4 * 1e-51, at_wavelength: 1550e-9,
        };
        prop_assert_eq!(phase_mismatch(f1, f2, fi, &betas).to_bits(), phase_mismatch(f2, f1, fi, &betas).to_bits());
    }
}
