use std::f64::consts::PI;

use crate::fibre::BetaCoefficients;

/// Four-wave-mixing phase mismatch per unit length [rad/m] for recentred offsets `f1`, `f2`
/// about a channel that sits `fi` away from the dispersion expansion frequency.
#[inline]
pub fn phase_mismatch(f1: f64, f2: f64, fi: f64, b: &BetaCoefficients) -> f64 {
    // Written in the symmetric functions s = f1+f2 and p = f1·f2 so swapping the offsets is exact.
    let (s, p) = (f1 + f2, f1 * f2);
    let quartic = s * s - 0.5 * p + 3.0 * fi * s + 3.0 * fi * fi;
    -4.0 * PI * PI * p * (b.beta2 + PI * b.beta3 * (s + 2.0 * fi) + (2.0 * PI * PI / 3.0) * b.beta4 * quartic)
}

/// φ(x, y) = xy·(c0 + c1·(x+y) + c2·(x² + 1.5xy + y²)) for a fixed channel, with the
/// coefficients hoisted out of the quadrature loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhaseKernel {
    c0: f64,
    c1: f64,
    c2: f64,
}

impl PhaseKernel {
    pub(crate) fn new(fi: f64, b: &BetaCoefficients) -> Self {
        let k = -4.0 * PI * PI;
        let q = 2.0 * PI * PI / 3.0 * b.beta4;
        PhaseKernel {
            c0: k * (b.beta2 + 2.0 * PI * b.beta3 * fi + 3.0 * q * fi * fi),
            c1: k * (PI * b.beta3 + 3.0 * q * fi),
            c2: k * q,
        }
    }

    #[inline]
    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        let (s, p) = (x + y, x * y);
        p * (self.c0 + self.c1 * s + self.c2 * (s * s - 0.5 * p))
    }
}
