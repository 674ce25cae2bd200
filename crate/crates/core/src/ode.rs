//! Embedded Dormand–Prince 5(4) integrator with steps clipped onto requested output points.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the output spacing when `None`.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-9, atol: 1e-12, h_init: None, h_min: 1e-9, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates dy/dz = rhs(z, y) from `z0`, returning the state at each of `outputs`
/// (ascending, ≥ z0).
pub fn integrate<F>(mut rhs: F, z0: f64, y0: &[f64], outputs: &[f64], opts: &OdeOptions) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&z| z < z0) {
        return Err(invalid("ODE output points must be ascending and not before the start"));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(outputs.len());
    let mut y = y0.to_vec();
    let mut z = z0;
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    rhs(z, &y, &mut k[0]);
    stats.rhs_evals += 1;
    let span = outputs.last().map_or(0.0, |&e| e - z0);
    let mut h = opts.h_init.unwrap_or_else(|| (span / 100.0).max(opts.h_min));

    for &target in outputs {
        while z < target {
            let mut step = h.min(target - z);
            let last = step >= target - z;
            if last {
                step = target - z;
            }
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(invalid("ODE step budget exhausted"));
            }
            let combine = |tmp: &mut [f64], y: &[f64], k: &[Vec<f64>; 7], coeffs: &[(usize, f64)]| {
                for i in 0..n {
                    let mut acc = 0.0;
                    for &(j, a) in coeffs {
                        acc += a * k[j][i];
                    }
                    tmp[i] = y[i] + step * acc;
                }
            };
            combine(&mut tmp, &y, &k, &[(0, A21)]);
            rhs(z + C2 * step, &tmp, &mut k[1]);
            combine(&mut tmp, &y, &k, &[(0, A31), (1, A32)]);
            rhs(z + C3 * step, &tmp, &mut k[2]);
            combine(&mut tmp, &y, &k, &[(0, A41), (1, A42), (2, A43)]);
            rhs(z + C4 * step, &tmp, &mut k[3]);
            combine(&mut tmp, &y, &k, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
            rhs(z + C5 * step, &tmp, &mut k[4]);
            combine(&mut tmp, &y, &k, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            rhs(z + step, &tmp, &mut k[5]);
            combine(&mut y_new, &y, &k, &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)]);
            rhs(z + step, &y_new, &mut k[6]);
            stats.rhs_evals += 6;

            let mut err = 0.0;
            for i in 0..n {
                let e = step * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n.max(1) as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("ODE state at z = {z:.6e}")));
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                stats.accepted += 1;
                z = if last { target } else { z + step };
                std::mem::swap(&mut y, &mut y_new);
                k.swap(0, 6);
                // A clipped final step says nothing about the natural step size.
                if !last || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                stats.rejected += 1;
                h = step * factor.min(1.0);
                if h < opts.h_min {
                    return Err(Error::StepUnderflow { z_m: z, step_m: h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
