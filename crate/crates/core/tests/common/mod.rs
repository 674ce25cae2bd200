//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use uwb_nli::fibre::{BetaCoefficients, FibreSpec};
use uwb_nli::gn::{all_channels_nli, GnSolverConfig};
use uwb_nli::grid::ChannelGrid;
use uwb_nli::raman::{build_distance_grid, solve_power_evolution};
use uwb_nli::units::{db_per_km_to_per_m, wavelength_to_freq, PER_W_KM};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let d = h * XGK[j];
        let s = f(c - d) + f(c + d);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) by recursive bisection.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    fn rec(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, whole: (f64, f64), rel: f64, abs: f64, depth: u32) -> f64 {
        let (v, e) = whole;
        if depth == 0 || e <= abs.max(rel * v.abs()) {
            return v;
        }
        let m = 0.5 * (a + b);
        let l = gk15(f, a, m);
        let r = gk15(f, m, b);
        rec(f, a, m, l, rel, 0.5 * abs, depth - 1) + rec(f, m, b, r, rel, 0.5 * abs, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let w = gk15(f, a, b);
    rec(f, a, b, w, rel, abs, 40)
}

/// Integral over [a, b] with geometric panels crowding towards `a` (ratio 1/2, 30 levels).
pub fn integrate_graded(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, rel: f64, toward_a: bool) -> f64 {
    let len = b - a;
    if len <= 0.0 {
        return 0.0;
    }
    let mut edges = vec![0.0];
    let mut t = 1.0 / (2f64).powi(30);
    while t < 1.0 {
        edges.push(t);
        t *= 2.0;
    }
    edges.push(1.0);
    let mut total = 0.0;
    let mut parts = Vec::new();
    for w in edges.windows(2) {
        let (lo, hi) = if toward_a { (a + w[0] * len, a + w[1] * len) } else { (b - w[1] * len, b - w[0] * len) };
        let (v, _) = gk15(f, lo, hi);
        parts.push((lo, hi, v));
    }
    let scale: f64 = parts.iter().map(|p| p.2.abs()).sum();
    for (lo, hi, _) in parts {
        total += integrate(f, lo, hi, rel, rel * scale * 1e-3);
    }
    total
}

/// Integrates over a union of intervals, crowding nodes towards any endpoint at zero.
pub fn integrate_pieces(f: &mut dyn FnMut(f64) -> f64, pieces: &[(f64, f64)], rel: f64) -> f64 {
    let mut total = 0.0;
    for &(a, b) in pieces {
        if b <= a {
            continue;
        }
        if a < 0.0 && b > 0.0 {
            total += integrate_graded(f, a, 0.0, rel, false) + integrate_graded(f, 0.0, b, rel, true);
        } else if a == 0.0 {
            total += integrate_graded(f, a, b, rel, true);
        } else if b == 0.0 {
            total += integrate_graded(f, a, b, rel, false);
        } else {
            total += integrate(f, a, b, rel, 0.0);
        }
    }
    total
}

/// Splits each interval at the given interior points.
pub fn split(pieces: &[(f64, f64)], points: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in pieces {
        let mut cuts: Vec<f64> = points.iter().copied().filter(|&p| p > a && p < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut lo = a;
        for c in cuts {
            out.push((lo, c));
            lo = c;
        }
        out.push((lo, b));
    }
    out
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let (lo, hi) = (a0.max(b0), a1.min(b1));
            if hi > lo {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Flat-spectrum WDM comb with a frequency-independent power profile e^{−αz} on fixed
/// distance steps, integrated directly in Cartesian (f1, f2).
pub struct CartesianGn {
    /// Absolute channel centres [Hz].
    pub centres: Vec<f64>,
    pub bandwidth: f64,
    pub psd: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// φ(f_centre, x, y) per unit length for offsets x, y around an absolute centre.
    pub phase: Box<dyn Fn(f64, f64, f64) -> f64>,
    pub edges: Vec<f64>,
}

impl CartesianGn {
    fn kernel(&self, phi: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for w in self.edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let dz = b - a;
            let mid = 0.5 * (a + b);
            let p = (-self.alpha * mid).exp();
            let arg = 0.5 * phi * dz;
            let s = if arg.abs() < 1e-8 { 1.0 } else { arg.sin() / arg };
            acc += Complex64::from_polar(p * dz * s, phi * mid);
        }
        acc.norm_sqr()
    }

    /// G(L, f) at the centre of channel `ch` [W/Hz].
    pub fn psd_at(&self, ch: usize, rel: f64) -> f64 {
        let fe = self.centres[ch];
        let half = 0.5 * self.bandwidth;
        let rel_ch: Vec<(f64, f64)> = self.centres.iter().map(|c| (c - half - fe, c + half - fe)).collect();
        let mut diffs = vec![0.0];
        for a in &rel_ch {
            for b in &rel_ch {
                for u in [a.0, a.1] {
                    for v in [b.0, b.1] {
                        diffs.push(u - v);
                        diffs.push(u);
                    }
                }
            }
        }
        let x_pieces = split(&rel_ch, &diffs);
        let mut outer = |x: f64| {
            let shifted: Vec<(f64, f64)> = rel_ch.iter().map(|&(a, b)| (a - x, b - x)).collect();
            let y_pieces = split(&intersect(&rel_ch, &shifted), &[0.0]);
            let mut inner = |y: f64| self.kernel((self.phase)(fe, x, y));
            integrate_pieces(&mut inner, &y_pieces, rel * 0.1)
        };
        let total = integrate_pieces(&mut outer, &x_pieces, rel);
        16.0 / 27.0 * self.gamma * self.gamma * self.psd.powi(3) * total
    }

    pub fn eta(&self, ch: usize, rel: f64) -> f64 {
        let p = self.psd * self.bandwidth;
        self.psd_at(ch, rel) * self.bandwidth / p.powi(3)
    }
}

const PS: f64 = 1e-3;

/// Hyperbolic solver vs the brute-force Cartesian oracle on a flat comb; returns dB errors.
pub fn hyperbolic_vs_cartesian(n_ch: usize, centre: f64, betas: BetaCoefficients, n_riemann: usize) -> Vec<f64> {
    let length = 80e3;
    let fibre =
        FibreSpec::standard(length).with_flat_attenuation(0.2).with_constant_gamma(1.3 * PER_W_KM).without_raman();
    let grid = ChannelGrid::uniform(n_ch, 100e9, 96e9, centre).unwrap();
    let dist = build_distance_grid(length, 1.0).unwrap();
    let evo = solve_power_evolution(&fibre, &grid, &vec![PS; n_ch], &dist).unwrap();
    let psd = PS / 96e9;

    let f_ref = wavelength_to_freq(betas.at_wavelength);
    let omega = 2.0 * PI;
    let beta = move |f: f64| {
        let w = omega * (f - f_ref);
        betas.beta2 * w * w / 2.0 + betas.beta3 * w.powi(3) / 6.0 + betas.beta4 * w.powi(4) / 24.0
    };
    let oracle = CartesianGn {
        centres: grid.freqs().to_vec(),
        bandwidth: 96e9,
        psd,
        alpha: db_per_km_to_per_m(0.2),
        gamma: 1.3e-3,
        phase: Box::new(move |fc, x, y| beta(fc + x) + beta(fc + y) - beta(fc + x + y) - beta(fc)),
        edges: dist.edges.clone(),
    };
    let cfg = GnSolverConfig::with_betas(betas, n_riemann, 1.0);
    let r = all_channels_nli(&grid, std::slice::from_ref(&evo), &fibre, &cfg, &vec![psd; n_ch]).unwrap();
    (0..n_ch).map(|i| 10.0 * (r.eta[i] / oracle.eta(i, 1e-4)).log10()).collect()
}
