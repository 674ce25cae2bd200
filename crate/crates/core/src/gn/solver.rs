use std::thread;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phase::PhaseKernel;
use super::quadrant::{quadrant_limits, QuadrantDomain};
use crate::error::{invalid, Error, Result};
use crate::fibre::{BetaCoefficients, FibreSpec};
use crate::grid::ChannelGrid;
use crate::raman::{LogScale, PowerEvolution};
use crate::table::{bracket, sinc, KahanSum};
use crate::units::wavelength_to_freq;

/// Placement of the υ1 nodes in each quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Upsilon1Sampling {
    /// Midpoints of N_R equal cells in υ1.
    Uniform,
    /// υ1 = υs·(e^{λt} − 1) with υs = floor·U1 and midpoints in t; resolves the
    /// narrow phase-matched region near υ1 = 0.
    Graded { floor: f64 },
}

/// Placement of the υ2 nodes at each υ1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Upsilon2Sampling {
    /// Midpoints of N_R equal cells over the full υ2 range.
    Uniform,
    /// N_R midpoints spread over the union of sub-ranges where all three signal
    /// PSDs are non-zero; breakpoints follow analytically from the channel edges.
    Active,
}

/// Estimate of ∫_ch G df used for η.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelIntegral {
    /// G at the channel centre times B_ch.
    Centre,
    /// Simpson's rule on the channel centre and both edges.
    Simpson3,
}

pub const DEFAULT_GRADED_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GnSolverConfig {
    /// N_R: samples per axis per quadrant.
    pub n_riemann: usize,
    /// N̄_M [steps/km].
    pub mean_steps_per_km: f64,
    pub reference_betas: BetaCoefficients,
    /// Expansion frequency of the β coefficients [Hz].
    pub reference_freq: f64,
    pub worker_count: usize,
    pub upsilon1: Upsilon1Sampling,
    pub upsilon2: Upsilon2Sampling,
    pub channel_integral: ChannelIntegral,
    pub log_scale: LogScale,
}

impl GnSolverConfig {
    /// Defaults around the fibre's reference β coefficients.
    pub fn new(fibre: &FibreSpec, n_riemann: usize, mean_steps_per_km: f64) -> Result<Self> {
        let betas = fibre.reference_betas()?;
        Ok(Self::with_betas(betas, n_riemann, mean_steps_per_km))
    }

    pub fn with_betas(betas: BetaCoefficients, n_riemann: usize, mean_steps_per_km: f64) -> Self {
        GnSolverConfig {
            n_riemann,
            mean_steps_per_km,
            reference_freq: wavelength_to_freq(betas.at_wavelength),
            reference_betas: betas,
            worker_count: 1,
            upsilon1: Upsilon1Sampling::Graded { floor: DEFAULT_GRADED_FLOOR },
            upsilon2: Upsilon2Sampling::Active,
            channel_integral: ChannelIntegral::Centre,
            log_scale: LogScale::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_riemann < 2 {
            return Err(invalid("N_R must be at least 2"));
        }
        if !(self.mean_steps_per_km > 0.0) {
            return Err(invalid("mean steps per km must be positive"));
        }
        if self.worker_count == 0 {
            return Err(invalid("worker count must be at least 1"));
        }
        if let Upsilon1Sampling::Graded { floor } = self.upsilon1 {
            if !(floor > 0.0 && floor < 1.0) {
                return Err(invalid("graded υ1 floor must lie in (0, 1)"));
            }
        }
        if !(self.reference_freq > 0.0) {
            return Err(invalid("reference frequency must be positive"));
        }
        Ok(())
    }
}

/// Per-channel NLI solution; guard channels hold zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NliResult {
    /// η_NLI [1/W²].
    pub eta: Vec<f64>,
    /// NLI power in the channel bandwidth [W].
    pub nli_power: Vec<f64>,
    /// G(L, f_i) at the channel centre [W/Hz].
    pub psd: Vec<f64>,
    /// Σ over the centre-frequency quadrature of each Q_κ (before the 16/27·γ² factor).
    pub quadrants: Vec<[f64; 4]>,
    /// False for guards and for channels whose η is undefined (zero launch power).
    pub defined: Vec<bool>,
}

impl NliResult {
    fn empty(n: usize) -> Self {
        NliResult {
            eta: vec![0.0; n],
            nli_power: vec![0.0; n],
            psd: vec![0.0; n],
            quadrants: vec![[0.0; 4]; n],
            defined: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelNli {
    pub eta: f64,
    pub nli_power: f64,
    pub psd: f64,
    pub quadrants: [f64; 4],
    pub defined: bool,
}

struct SpanData {
    /// L̃_k + z_n for every edge.
    edges: Vec<f64>,
    /// L̃_k + z_m for every step midpoint.
    mids: Vec<f64>,
    widths: Vec<f64>,
    /// ln ρ channel-major, [i·nm + m].
    lr: Vec<f64>,
    nm: usize,
    /// ρ(z̃_m) when the profile is identical for every channel.
    common: Option<Vec<f64>>,
}

/// Shared immutable inputs of one solve.
struct Prepared<'a> {
    grid: &'a ChannelGrid,
    fibre: &'a FibreSpec,
    cfg: &'a GnSolverConfig,
    freqs: Vec<f64>,
    psd: Vec<f64>,
    /// Lit channels as (lo, hi, psd) in absolute frequency, ascending.
    lit: Vec<(f64, f64, f64)>,
    spans: Vec<SpanData>,
    dz_min: f64,
    half_band: f64,
}

const TELESCOPE_MIN_PHASE: f64 = 1e-3;

impl<'a> Prepared<'a> {
    fn new(
        grid: &'a ChannelGrid,
        evos: &[PowerEvolution],
        fibre: &'a FibreSpec,
        cfg: &'a GnSolverConfig,
        launch_psd: &[f64],
    ) -> Result<Self> {
        cfg.validate()?;
        let n = grid.len();
        if launch_psd.len() != n {
            return Err(invalid(format!("expected {n} launch PSD values, got {}", launch_psd.len())));
        }
        if launch_psd.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("launch PSD must be finite and non-negative"));
        }
        if evos.is_empty() {
            return Err(invalid("at least one span power evolution is required"));
        }
        let mut psd = launch_psd.to_vec();
        grid.mask_guards(&mut psd);
        let half = 0.5 * grid.channel_bandwidth();
        let lit = (0..n).filter(|&i| psd[i] > 0.0).map(|i| (grid.freq(i) - half, grid.freq(i) + half, psd[i])).collect();

        let mut spans = Vec::with_capacity(evos.len());
        let mut offset = 0.0;
        let mut dz_min = f64::INFINITY;
        for evo in evos {
            if evo.freqs() != grid.freqs() {
                return Err(invalid("power evolution was computed on a different channel grid"));
            }
            let g = &evo.grid;
            let nm = g.step_count();
            let lr = evo.log_rho_channel_major();
            let common = (1..n)
                .all(|i| lr[i * nm..(i + 1) * nm] == lr[..nm])
                .then(|| lr[..nm].iter().map(|v| v.exp()).collect());
            dz_min = g.widths.iter().copied().fold(dz_min, f64::min);
            spans.push(SpanData {
                edges: g.edges.iter().map(|z| offset + z).collect(),
                mids: g.midpoints.iter().map(|z| offset + z).collect(),
                widths: g.widths.clone(),
                lr,
                nm,
                common,
            });
            offset += g.length();
        }
        Ok(Prepared {
            grid,
            fibre,
            cfg,
            freqs: grid.freqs().to_vec(),
            psd,
            lit,
            spans,
            dz_min,
            half_band: grid.half_band(),
        })
    }

    /// Launch PSD at absolute frequency `f`.
    #[inline]
    fn tx(&self, f: f64) -> f64 {
        let j = self.lit.partition_point(|c| c.1 < f);
        match self.lit.get(j) {
            Some(&(lo, _, p)) if f >= lo => p,
            _ => 0.0,
        }
    }

    #[inline]
    fn locate(&self, f: f64) -> (usize, usize, f64) {
        let (j, t) = bracket(&self.freqs, f);
        (j, (j + 1).min(self.freqs.len() - 1), t)
    }

    /// Σ_k Σ_m p·∫e^{jφζ}dζ, pre-multiplied by jφ in the telescoped branch.
    #[inline]
    fn kernel(&self, fe: f64, x: f64, y: f64, phi: f64, lr0: &[Vec<f64>], tele: bool) -> Complex64 {
        let idx = [self.locate(fe + x), self.locate(fe + y), self.locate(fe + x + y)];
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, sp) in self.spans.iter().enumerate() {
            let nm = sp.nm;
            let row = |j: usize| &sp.lr[j * nm..(j + 1) * nm];
            let (a1, b1, a2, b2, a3, b3) = (row(idx[0].0), row(idx[0].1), row(idx[1].0), row(idx[1].1), row(idx[2].0), row(idx[2].1));
            let (t1, t2, t3) = (idx[0].2, idx[1].2, idx[2].2);
            let l0 = &lr0[s];
            let p = |m: usize| -> f64 {
                if let Some(c) = &sp.common {
                    return c[m];
                }
                let l = a1[m] + t1 * (b1[m] - a1[m]) + a2[m] + t2 * (b2[m] - a2[m]) + a3[m] + t3 * (b3[m] - a3[m]) - l0[m];
                (0.5 * l).exp()
            };
            if tele {
                let (si, co) = (phi * sp.edges[0]).sin_cos();
                let mut prev = Complex64::new(co, si);
                for m in 0..nm {
                    let (si, co) = (phi * sp.edges[m + 1]).sin_cos();
                    let next = Complex64::new(co, si);
                    acc += (next - prev) * p(m);
                    prev = next;
                }
            } else {
                for m in 0..nm {
                    let (si, co) = (phi * sp.mids[m]).sin_cos();
                    let w = sp.widths[m] * sinc(0.5 * phi * sp.widths[m]);
                    acc += Complex64::new(co, si) * (p(m) * w);
                }
            }
        }
        acc
    }

    /// |Σ ∫ p e^{jφζ} dζ|² at one recentred point.
    #[inline]
    fn kernel_power(&self, fe: f64, x: f64, y: f64, phase: &PhaseKernel, lr0: &[Vec<f64>]) -> f64 {
        let phi = phase.eval(x, y);
        let tele = phi.abs() * self.dz_min >= TELESCOPE_MIN_PHASE;
        let s = self.kernel(fe, x, y, phi, lr0, tele);
        if tele {
            s.norm_sqr() / (phi * phi)
        } else {
            s.norm_sqr()
        }
    }

    /// υ2 nodes and weights (ΔΥ2 times the PSD product) at one υ1 node.
    fn v2_nodes(&self, q: &QuadrantDomain, u1: f64, fe: f64, out: &mut Vec<(f64, f64)>, scratch: &mut Vec<f64>) {
        out.clear();
        let (lo, hi) = q.v2_range(u1);
        let n = self.cfg.n_riemann;
        let r = u1.sqrt();
        let product = |u2: f64| {
            let (x, y) = q.map(u1, u2);
            self.tx(fe + x) * self.tx(fe + y) * self.tx(fe + x + y)
        };
        match self.cfg.upsilon2 {
            Upsilon2Sampling::Uniform => {
                let w = (hi - lo) / n as f64;
                for k in 0..n {
                    let u2 = lo + (k as f64 + 0.5) * w;
                    let t = product(u2);
                    if t > 0.0 {
                        out.push((u2, w * t));
                    }
                }
            }
            Upsilon2Sampling::Active => {
                scratch.clear();
                scratch.push(lo);
                scratch.push(hi);
                self.breakpoints(q, r, fe, lo, hi, scratch);
                scratch.sort_by(f64::total_cmp);
                // Active pieces as (start, length, psd product), stored after the breakpoints.
                let nb = scratch.len();
                let mut total = 0.0;
                for k in 0..nb - 1 {
                    let (a, b) = (scratch[k], scratch[k + 1]);
                    if b <= a {
                        continue;
                    }
                    let t = product(0.5 * (a + b));
                    if t > 0.0 {
                        scratch.extend_from_slice(&[a, b - a, t]);
                        total += b - a;
                    }
                }
                if total <= 0.0 {
                    return;
                }
                let w = total / n as f64;
                let pieces = &scratch[nb..];
                let (mut piece, mut start) = (0usize, 0.0);
                for k in 0..n {
                    let s = (k as f64 + 0.5) * w;
                    while piece + 1 < pieces.len() / 3 && s >= start + pieces[3 * piece + 1] {
                        start += pieces[3 * piece + 1];
                        piece += 1;
                    }
                    let (a, len, t) = (pieces[3 * piece], pieces[3 * piece + 1], pieces[3 * piece + 2]);
                    out.push((a + (s - start).min(len), w * t));
                }
            }
        }
    }

    /// υ2 values in (lo, hi) where f1, f2 or f1+f2 crosses a lit channel edge.
    fn breakpoints(&self, q: &QuadrantDomain, r: f64, fe: f64, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let (s1, s2) = (q.s1, q.s2);
        let mut push = |v: f64| {
            if v > lo && v < hi {
                out.push(v);
            }
        };
        // f1 = s1·r·e^{υ2} sweeps s1·[r·e^{lo}, r·e^{hi}].
        let (x_lo, x_hi) = (r * lo.exp(), r * hi.exp());
        // f2 = s2·r·e^{−υ2} sweeps s2·[r·e^{−hi}, r·e^{−lo}].
        let (y_lo, y_hi) = (r * (-hi).exp(), r * (-lo).exp());
        let edges = || self.lit.iter().flat_map(|c| [c.0 - fe, c.1 - fe]);
        for e in edges() {
            let ex = s1 * e;
            if ex >= x_lo && ex <= x_hi {
                push((ex / r).ln());
            }
            let ey = s2 * e;
            if ey >= y_lo && ey <= y_hi {
                push(-(ey / r).ln());
            }
            if s1 == s2 {
                let c = s1 * e / (2.0 * r);
                if c >= 1.0 {
                    let a = c.acosh();
                    push(a);
                    push(-a);
                }
            } else {
                push((s1 * e / (2.0 * r)).asinh());
            }
        }
    }

    /// Σ_κ Q_κ at absolute frequency `fe`, together with each quadrant.
    fn quadrature(&self, fe: f64) -> Result<(f64, [f64; 4])> {
        let f = fe - self.grid.centre();
        let phase = PhaseKernel::new(fe - self.cfg.reference_freq, &self.cfg.reference_betas);
        let lr0: Vec<Vec<f64>> = self
            .spans
            .iter()
            .map(|sp| {
                let (j0, j1, t) = self.locate(fe);
                (0..sp.nm).map(|m| sp.lr[j0 * sp.nm + m] + t * (sp.lr[j1 * sp.nm + m] - sp.lr[j0 * sp.nm + m])).collect()
            })
            .collect();
        let n = self.cfg.n_riemann;
        let mut nodes = Vec::with_capacity(n);
        let mut scratch = Vec::new();
        let mut quads = [0.0; 4];
        for kappa in 1..=4u8 {
            let q = quadrant_limits(kappa, f, self.half_band)?;
            let mut sum = KahanSum::default();
            for k in 0..n {
                let t = (k as f64 + 0.5) / n as f64;
                let (u1, w1) = match self.cfg.upsilon1 {
                    Upsilon1Sampling::Uniform => (t * q.u1_max, q.u1_max / n as f64),
                    Upsilon1Sampling::Graded { floor } => {
                        let us = floor * q.u1_max;
                        let lam = (1.0 / floor).ln_1p();
                        (us * (lam * t).exp_m1(), us * lam * (lam * t).exp() / n as f64)
                    }
                };
                self.v2_nodes(&q, u1, fe, &mut nodes, &mut scratch);
                for &(u2, w2) in &nodes {
                    let (x, y) = q.map(u1, u2);
                    let v = w1 * w2 * self.kernel_power(fe, x, y, &phase, &lr0);
                    sum.add(v);
                }
            }
            let v = sum.value();
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("quadrant {kappa} at {fe:.6e} Hz")));
            }
            quads[kappa as usize - 1] = v;
        }
        Ok((quads.iter().sum(), quads))
    }

    fn channel(&self, i: usize) -> Result<ChannelNli> {
        let fe = self.freqs[i];
        let gamma = self.fibre.gamma_at_freq(fe)?;
        let scale = 16.0 / 27.0 * gamma * gamma;
        let b = self.grid.channel_bandwidth();
        let (q_sum, quads) = self.quadrature(fe)?;
        let g_centre = scale * q_sum;
        let nli_power = match self.cfg.channel_integral {
            ChannelIntegral::Centre => g_centre * b,
            ChannelIntegral::Simpson3 => {
                let lo = scale * self.quadrature(fe - 0.5 * b)?.0;
                let hi = scale * self.quadrature(fe + 0.5 * b)?.0;
                b / 6.0 * (lo + 4.0 * g_centre + hi)
            }
        };
        let p = self.psd[i] * b;
        let defined = p > 0.0;
        Ok(ChannelNli {
            eta: if defined { nli_power / (p * p * p) } else { 0.0 },
            nli_power,
            psd: g_centre,
            quadrants: quads,
            defined,
        })
    }
}

/// NLI of a single channel.
pub fn channel_nli(
    channel: usize,
    grid: &ChannelGrid,
    evos: &[PowerEvolution],
    fibre: &FibreSpec,
    cfg: &GnSolverConfig,
    launch_psd: &[f64],
) -> Result<ChannelNli> {
    if channel >= grid.len() {
        return Err(invalid(format!("channel {channel} not in grid")));
    }
    let prep = Prepared::new(grid, evos, fibre, cfg, launch_psd)?;
    prep.channel(channel)
}

/// NLI of every non-guard channel, spread over `cfg.worker_count` workers in contiguous
/// batches. Each channel's sum runs in a fixed order, so results do not depend on the
/// worker count.
pub fn all_channels_nli(
    grid: &ChannelGrid,
    evos: &[PowerEvolution],
    fibre: &FibreSpec,
    cfg: &GnSolverConfig,
    launch_psd: &[f64],
) -> Result<NliResult> {
    let targets = grid.active();
    channels_nli(&targets, grid, evos, fibre, cfg, launch_psd)
}

/// NLI of the listed channels; the others stay zero.
pub fn channels_nli(
    targets: &[usize],
    grid: &ChannelGrid,
    evos: &[PowerEvolution],
    fibre: &FibreSpec,
    cfg: &GnSolverConfig,
    launch_psd: &[f64],
) -> Result<NliResult> {
    let prep = Prepared::new(grid, evos, fibre, cfg, launch_psd)?;
    let targets: Vec<usize> = targets.iter().copied().filter(|&i| i < grid.len() && !grid.is_guard(i)).collect();
    let workers = cfg.worker_count.min(targets.len()).max(1);
    let chunk = targets.len().div_ceil(workers).max(1);
    let results: Vec<(usize, Result<ChannelNli>)> = if workers == 1 {
        targets.iter().map(|&i| (i, prep.channel(i))).collect()
    } else {
        let prep = &prep;
        thread::scope(|s| {
            let handles: Vec<_> = targets
                .chunks(chunk)
                .map(|batch| s.spawn(move || batch.iter().map(|&i| (i, prep.channel(i))).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("NLI worker panicked")).collect()
        })
    };
    let mut out = NliResult::empty(grid.len());
    let mut failures = Vec::new();
    for (i, r) in results {
        match r {
            Ok(c) => {
                out.eta[i] = c.eta;
                out.nli_power[i] = c.nli_power;
                out.psd[i] = c.psd;
                out.quadrants[i] = c.quadrants;
                out.defined[i] = c.defined;
            }
            Err(e) => failures.push((i, e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::ChannelFailures(failures));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raman::{build_distance_grid, solve_power_evolution};
    use crate::units::{db_per_km_to_per_m, PER_W_KM, PS2_KM};

    fn toy(n: usize, raman: bool) -> (FibreSpec, ChannelGrid, GnSolverConfig) {
        let mut fibre = FibreSpec::standard(80e3).with_flat_attenuation(0.2).with_constant_gamma(1.3 * PER_W_KM);
        if !raman {
            fibre = fibre.without_raman();
        }
        let betas = BetaCoefficients { beta2: -21.0 * PS2_KM, beta3: 0.0, beta4: 0.0, at_wavelength: 1550e-9 };
        let grid = ChannelGrid::uniform(n, 100e9, 96e9, wavelength_to_freq(1550e-9)).unwrap();
        let cfg = GnSolverConfig::with_betas(betas, 40, 1.0);
        (fibre, grid, cfg)
    }

    fn solve(fibre: &FibreSpec, grid: &ChannelGrid, cfg: &GnSolverConfig, p: f64) -> NliResult {
        let dist = build_distance_grid(80e3, cfg.mean_steps_per_km).unwrap();
        let launch = vec![p; grid.len()];
        let evo = solve_power_evolution(fibre, grid, &launch, &dist).unwrap();
        let psd: Vec<f64> = launch.iter().map(|p| p / grid.channel_bandwidth()).collect();
        all_channels_nli(grid, std::slice::from_ref(&evo), fibre, cfg, &psd).unwrap()
    }

    #[test]
    fn step_sum_matches_continuous_integral() {
        let (fibre, grid, cfg) = toy(1, false);
        let dist = build_distance_grid(80e3, 50.0).unwrap();
        let evo = solve_power_evolution(&fibre, &grid, &[1e-3], &dist).unwrap();
        let psd = [1e-3 / 96e9];
        let prep = Prepared::new(&grid, std::slice::from_ref(&evo), &fibre, &cfg, &psd).unwrap();
        let a = db_per_km_to_per_m(0.2);
        let fe = grid.freq(0);
        let lr0 = vec![(0..prep.spans[0].nm).map(|m| prep.spans[0].lr[m]).collect::<Vec<_>>()];
        for &phi in &[3e-4, 2e-3, -5e-3] {
            let tele = prep.kernel(fe, 0.0, 0.0, phi, &lr0, true) / Complex64::new(0.0, phi);
            let direct = prep.kernel(fe, 0.0, 0.0, phi, &lr0, false);
            assert!((tele - direct).norm() < 1e-9 * direct.norm());
            let c = Complex64::new(-a, phi);
            let exact = ((c * 80e3).exp() - 1.0) / c;
            assert!((direct - exact).norm() < 1e-3 * exact.norm(), "{direct} vs {exact}");
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let (fibre, grid, mut cfg) = toy(5, true);
        let r1 = solve(&fibre, &grid, &cfg, 1e-3);
        cfg.worker_count = 3;
        let r3 = solve(&fibre, &grid, &cfg, 1e-3);
        assert_eq!(r1, r3);
    }

    #[test]
    fn cubic_scaling_without_raman() {
        let (fibre, grid, cfg) = toy(3, false);
        let a = solve(&fibre, &grid, &cfg, 1e-3);
        let b = solve(&fibre, &grid, &cfg, 2e-3);
        for i in 0..3 {
            assert!((b.eta[i] / a.eta[i] - 1.0).abs() < 1e-12);
            assert!((b.nli_power[i] / a.nli_power[i] - 8.0).abs() < 1e-10);
        }
    }

    #[test]
    fn guards_and_dark_channels() {
        let (fibre, grid, cfg) = toy(3, false);
        let grid = grid.with_guards(&[2]).unwrap();
        let r = solve(&fibre, &grid, &cfg, 1e-3);
        assert_eq!(r.eta[2], 0.0);
        assert!(!r.defined[2]);
        assert!(r.eta[0] > 0.0 && r.defined[0]);
        let all = grid.with_guards(&[0, 1]).unwrap();
        let dist = build_distance_grid(80e3, 1.0).unwrap();
        let evo = solve_power_evolution(&fibre, &all, &[1e-3; 3], &dist).unwrap();
        let r = all_channels_nli(&all, std::slice::from_ref(&evo), &fibre, &cfg, &[1e-14; 3]).unwrap();
        assert!(r.eta.iter().all(|&e| e == 0.0));
        assert!(r.defined.iter().all(|d| !d));
    }

    #[test]
    fn uniform_and_active_sampling_agree() {
        let (fibre, grid, mut cfg) = toy(3, false);
        cfg.n_riemann = 200;
        let a = solve(&fibre, &grid, &cfg, 1e-3);
        cfg.upsilon2 = Upsilon2Sampling::Uniform;
        cfg.n_riemann = 800;
        let u = solve(&fibre, &grid, &cfg, 1e-3);
        for i in 0..3 {
            let d = 10.0 * (a.eta[i] / u.eta[i]).log10();
            assert!(d.abs() < 0.1, "channel {i}: {d} dB");
        }
    }
}
