//! Chromatic dispersion: polynomial fits of D(λ), their group-velocity Taylor
//! coefficients, and the built-in tabulated dispersion profile.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::table::Table;
use crate::units::{BAND_MAX_M, BAND_MIN_M, PS_NM2_KM, PS_NM3_KM, PS_NM_KM, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitOrder {
    /// D and S only (β2, β3).
    First,
    /// D, S and the curvature Ṡ (β2, β3, β4).
    Second,
}

/// Taylor description of D(λ) about `lambda_c`:
/// D(λ) = D + S·(λ−λc) + ½·Ṡ·(λ−λc)².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionFit {
    pub lambda_c: f64,
    pub d: f64,
    pub s: f64,
    pub s_dot: f64,
    pub order: FitOrder,
}

/// Group-velocity dispersion coefficients at a given wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCoefficients {
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub at_wavelength: f64,
}

impl BetaCoefficients {
    pub fn zero(at_wavelength: f64) -> Self {
        BetaCoefficients { beta2: 0.0, beta3: 0.0, beta4: 0.0, at_wavelength }
    }

    /// Propagation constant offset β(ω) − β0 − β1·ω for an angular frequency offset ω.
    #[inline]
    pub fn dispersive_phase(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        w2 * (self.beta2 / 2.0 + omega * self.beta3 / 6.0 + w2 * self.beta4 / 24.0)
    }

    /// Recovers (D, S, Ṡ) at `at_wavelength` by inverting the β relations.
    pub fn to_dispersion(&self) -> (f64, f64, f64) {
        let lam = self.at_wavelength;
        let k = 2.0 * PI * SPEED_OF_LIGHT;
        let d = -self.beta2 * k / (lam * lam);
        let s = (self.beta3 * k * k / lam.powi(3) - 2.0 * d) / lam;
        let s_dot = (-self.beta4 * k.powi(3) / lam.powi(4) - 6.0 * d - 6.0 * s * lam) / (lam * lam);
        (d, s, s_dot)
    }
}

impl DispersionFit {
    /// The second-order coefficients quoted for the reference UWB link.
    pub fn reference_link() -> Self {
        DispersionFit {
            lambda_c: 1438e-9,
            d: 17.74 * PS_NM_KM,
            s: 0.057 * PS_NM2_KM,
            s_dot: -5.975e-5 * PS_NM3_KM,
            order: FitOrder::Second,
        }
    }

    #[inline]
    fn curvature(&self) -> f64 {
        match self.order {
            FitOrder::First => 0.0,
            FitOrder::Second => self.s_dot,
        }
    }

    /// Fit-reconstructed D(λ) [s/m²].
    pub fn d_at(&self, lambda: f64) -> f64 {
        let x = lambda - self.lambda_c;
        self.d + self.s * x + 0.5 * self.curvature() * x * x
    }

    /// Fit-reconstructed S(λ) [s/m³].
    pub fn s_at(&self, lambda: f64) -> f64 {
        self.s + self.curvature() * (lambda - self.lambda_c)
    }

    /// Least-squares polynomial fit of a tabulated profile, using the table
    /// nodes inside `[lo, hi]`.
    pub fn fit_table(table: &Table, lambda_c: f64, order: FitOrder, lo: f64, hi: f64) -> Result<Self> {
        let pts: Vec<(f64, f64)> = table
            .xs()
            .iter()
            .zip(table.ys())
            .filter(|(&x, _)| x >= lo && x <= hi)
            .map(|(&x, &y)| (x, y))
            .collect();
        let ncoef = match order {
            FitOrder::First => 2,
            FitOrder::Second => 3,
        };
        if pts.len() < ncoef {
            return Err(invalid("too few table points for the requested fit order"));
        }
        // Normalised abscissa keeps the normal equations well conditioned.
        let scale = 0.5 * (hi - lo);
        let mut ata = [[0.0f64; 3]; 3];
        let mut atb = [0.0f64; 3];
        for &(x, y) in &pts {
            let u = (x - lambda_c) / scale;
            let basis = [1.0, u, u * u];
            for r in 0..ncoef {
                atb[r] += basis[r] * y;
                for c in 0..ncoef {
                    ata[r][c] += basis[r] * basis[c];
                }
            }
        }
        let coef = solve_small(&mut ata, &mut atb, ncoef)?;
        let s_dot = if ncoef == 3 { 2.0 * coef[2] / (scale * scale) } else { 0.0 };
        Ok(DispersionFit { lambda_c, d: coef[0], s: coef[1] / scale, s_dot, order })
    }
}

fn solve_small(a: &mut [[f64; 3]; 3], b: &mut [f64; 3], n: usize) -> Result<[f64; 3]> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(invalid("singular least-squares system"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// β2, β3, β4 at `lambda` using the fit-reconstructed D(λ), S(λ) and Ṡ.
pub fn beta_from_dispersion(fit: &DispersionFit, lambda: f64) -> Result<BetaCoefficients> {
    if !(lambda > 0.0) || !(fit.lambda_c > 0.0) {
        return Err(invalid("wavelengths must be positive"));
    }
    let d = fit.d_at(lambda);
    let s = fit.s_at(lambda);
    let s_dot = fit.curvature();
    let k = 2.0 * PI * SPEED_OF_LIGHT;
    Ok(BetaCoefficients {
        beta2: -d * lambda * lambda / k,
        beta3: lambda.powi(3) / (k * k) * (2.0 * d + s * lambda),
        beta4: -lambda.powi(4) / k.powi(3) * (6.0 * d + 6.0 * s * lambda + s_dot * lambda * lambda),
        at_wavelength: lambda,
    })
}

/// Root of the fitted D(λ) inside the supported band (the smallest if two).
pub fn zero_dispersion_wavelength(fit: &DispersionFit) -> Result<f64> {
    let (a, b, c) = (0.5 * fit.curvature(), fit.s, fit.d);
    let mut roots = Vec::with_capacity(2);
    if a == 0.0 {
        if b != 0.0 {
            roots.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            // Numerically stable quadratic roots.
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            roots.push(q / a);
            if q != 0.0 {
                roots.push(c / q);
            }
        }
    }
    roots
        .into_iter()
        .map(|x| x + fit.lambda_c)
        .filter(|&l| (BAND_MIN_M..=BAND_MAX_M).contains(&l))
        .min_by(f64::total_cmp)
        .ok_or(Error::NoZeroCrossing { lo_nm: BAND_MIN_M * 1e9, hi_nm: BAND_MAX_M * 1e9 })
}

/// Tabulated D(λ) standing in for mode-solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    pub table: Table,
}

/// Zero-dispersion wavelength of the built-in profile.
pub const DEFAULT_LAMBDA_ZD: f64 = 1302.3e-9;
const DEFAULT_S0: f64 = 0.086;
const DEFAULT_LINEAR_WEIGHT: f64 = 0.17;

impl DispersionTable {
    /// Built-in G.652.D-like profile on a 1 nm grid over 1250–1700 nm:
    /// a blend of the ITU Sellmeier-type form and a linear term, crossing zero at 1302.3 nm.
    pub fn builtin() -> Self {
        let l0 = DEFAULT_LAMBDA_ZD * 1e9;
        let pts = (1250..=1700)
            .map(|nm| {
                let l = nm as f64;
                let sellmeier = l - l0.powi(4) / l.powi(3);
                let d = DEFAULT_S0 / 4.0
                    * ((1.0 - DEFAULT_LINEAR_WEIGHT) * sellmeier + 4.0 * DEFAULT_LINEAR_WEIGHT * (l - l0));
                (l * 1e-9, d * PS_NM_KM)
            })
            .collect();
        DispersionTable { table: Table::new(pts).expect("builtin dispersion table") }
    }

    pub fn d_at(&self, lambda: f64) -> Option<f64> {
        self.table.eval(lambda)
    }

    /// First sign change inside the supported band, refined by linear interpolation.
    pub fn zero_crossing(&self) -> Result<f64> {
        let xs = self.table.xs();
        let ys = self.table.ys();
        for j in 0..xs.len() - 1 {
            let (x0, x1, y0, y1) = (xs[j], xs[j + 1], ys[j], ys[j + 1]);
            if x1 < BAND_MIN_M || x0 > BAND_MAX_M {
                continue;
            }
            if y0 == 0.0 {
                return Ok(x0);
            }
            if y0.signum() != y1.signum() {
                let root = x0 - y0 * (x1 - x0) / (y1 - y0);
                if (BAND_MIN_M..=BAND_MAX_M).contains(&root) {
                    return Ok(root);
                }
            }
        }
        Err(Error::NoZeroCrossing { lo_nm: BAND_MIN_M * 1e9, hi_nm: BAND_MAX_M * 1e9 })
    }

    pub fn fit(&self, lambda_c: f64, order: FitOrder) -> Result<DispersionFit> {
        DispersionFit::fit_table(&self.table, lambda_c, order, BAND_MIN_M, BAND_MAX_M)
    }
}
