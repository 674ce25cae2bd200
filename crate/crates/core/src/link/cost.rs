use serde::{Deserialize, Serialize};

use super::ase_power;
use super::profile::{BandPlan, SegmentProfile};
use crate::band::Band;
use crate::cfm::cfm_nli;
use crate::error::{invalid, Result};
use crate::fibre::FibreSpec;
use crate::gn::{all_channels_nli, GnSolverConfig};
use crate::grid::ChannelGrid;
use crate::raman::{build_distance_grid_with, solve_power_evolution, PowerEvolution};
use crate::units::{db_to_linear, linear_to_db, watt_to_dbm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliModel {
    Integral,
    Cfm,
}

/// Everything a cost evaluation needs besides the launch profile.
#[derive(Debug, Clone)]
pub struct LinkContext {
    pub grid: ChannelGrid,
    pub fibre: FibreSpec,
    pub plan: BandPlan,
    pub solver: GnSolverConfig,
    pub model: NliModel,
    /// Back-to-back transceiver SNR [dB].
    pub snr_trx_db: Option<f64>,
    /// Holds η fixed instead of re-solving it per candidate.
    pub frozen_eta: Option<Vec<f64>>,
}

impl LinkContext {
    pub fn new(grid: ChannelGrid, fibre: FibreSpec, plan: BandPlan, solver: GnSolverConfig) -> Self {
        LinkContext { grid, fibre, plan, solver, model: NliModel::Integral, snr_trx_db: None, frozen_eta: None }
    }
}

/// One cost evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub launch: Vec<f64>,
    pub eta: Vec<f64>,
    pub p_ase: Vec<f64>,
    /// Per-channel SNR (linear), transceiver noise included when configured; 0 for guards.
    pub snr: Vec<f64>,
    /// 𝓛 = −Σ log₂(1 + SNR_i).
    pub cost: f64,
    pub evolutions: Vec<PowerEvolution>,
}

/// Power evolution of every span for one launch profile.
pub fn span_evolutions(ctx: &LinkContext, launch: &[f64]) -> Result<Vec<PowerEvolution>> {
    let cfg = &ctx.solver;
    ctx.fibre
        .span_lengths
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let dist = build_distance_grid_with(l, cfg.mean_steps_per_km, cfg.log_scale, k)?;
            solve_power_evolution(&ctx.fibre, &ctx.grid, launch, &dist)
        })
        .collect()
}

/// Evaluates 𝓛 for per-channel launch powers [W]; ideal amplifiers restore each span's
/// output to the launch profile.
pub fn evaluate(ctx: &LinkContext, launch: &[f64]) -> Result<Evaluation> {
    let grid = &ctx.grid;
    let n = grid.len();
    if launch.len() != n {
        return Err(invalid(format!("expected {n} launch powers, got {}", launch.len())));
    }
    let mut launch = launch.to_vec();
    grid.mask_guards(&mut launch);
    let evos = span_evolutions(ctx, &launch)?;
    let bw = grid.channel_bandwidth();
    let eta = match &ctx.frozen_eta {
        Some(e) if e.len() == n => e.clone(),
        Some(_) => return Err(invalid("frozen η has the wrong length")),
        None => {
            let psd: Vec<f64> = launch.iter().map(|p| p / bw).collect();
            match ctx.model {
                NliModel::Integral => all_channels_nli(grid, &evos, &ctx.fibre, &ctx.solver, &psd)?.eta,
                NliModel::Cfm => cfm_nli(grid, &evos, &ctx.fibre, &ctx.solver, &psd)?.eta,
            }
        }
    };
    let nf = ctx.plan.noise_figures(n);
    let trx = ctx.snr_trx_db.map(db_to_linear);
    let mut p_ase = vec![0.0; n];
    let mut snr = vec![0.0; n];
    let mut cost = 0.0;
    for i in 0..n {
        let (Some(nf_i), true) = (nf[i], launch[i] > 0.0) else { continue };
        for evo in &evos {
            p_ase[i] += ase_power(nf_i, 1.0 / evo.rho_end(i), grid.freq(i), bw)?;
        }
        let p = launch[i];
        let mut noise = eta[i] * p.powi(3) + p_ase[i];
        if let Some(t) = trx {
            noise += p / t;
        }
        snr[i] = p / noise;
        cost -= (1.0 + snr[i]).log2();
    }
    Ok(Evaluation { launch, eta, p_ase, snr, cost, evolutions: evos })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub index: usize,
    pub freq_hz: f64,
    pub band: Option<Band>,
    pub guard: bool,
    pub launch_dbm: f64,
    /// dB re 1/W².
    pub eta_db: f64,
    pub p_ase_w: f64,
    pub snr_db: f64,
    pub capacity_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandReport {
    pub band: Band,
    pub channels: usize,
    pub total_power_dbm: f64,
    pub capacity_tbps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport {
    pub channels: Vec<ChannelReport>,
    pub bands: Vec<BandReport>,
    pub total_power_dbm: f64,
    pub capacity_tbps: f64,
    pub cost: f64,
}

/// Per-channel and per-band report; capacities are 2·B_ch·log₂(1 + SNR).
pub fn report(profile: &SegmentProfile, ctx: &LinkContext) -> Result<LinkReport> {
    let launch = profile.channel_watts(&ctx.plan, &ctx.grid)?;
    let ev = evaluate(ctx, &launch)?;
    Ok(report_from(&ev, ctx))
}

pub(crate) fn report_from(ev: &Evaluation, ctx: &LinkContext) -> LinkReport {
    let grid = &ctx.grid;
    let bw = grid.channel_bandwidth();
    let channels: Vec<ChannelReport> = (0..grid.len())
        .map(|i| {
            let lit = ev.snr[i] > 0.0;
            ChannelReport {
                index: i,
                freq_hz: grid.freq(i),
                band: grid.band_of(i),
                guard: grid.is_guard(i),
                launch_dbm: if lit { watt_to_dbm(ev.launch[i]) } else { f64::NEG_INFINITY },
                eta_db: if lit { linear_to_db(ev.eta[i]) } else { f64::NEG_INFINITY },
                p_ase_w: ev.p_ase[i],
                snr_db: if lit { linear_to_db(ev.snr[i]) } else { f64::NEG_INFINITY },
                capacity_bps: if lit { 2.0 * bw * (1.0 + ev.snr[i]).log2() } else { 0.0 },
            }
        })
        .collect();
    let bands = ctx
        .plan
        .bands
        .iter()
        .map(|b| {
            let power: f64 = b.channels.iter().map(|&i| ev.launch[i]).sum();
            let cap: f64 = b.channels.iter().map(|&i| channels[i].capacity_bps).sum();
            BandReport { band: b.band, channels: b.channels.len(), total_power_dbm: watt_to_dbm(power), capacity_tbps: cap / 1e12 }
        })
        .collect();
    let total: f64 = ev.launch.iter().sum();
    let cap: f64 = channels.iter().map(|c| c.capacity_bps).sum();
    LinkReport { channels, bands, total_power_dbm: watt_to_dbm(total), capacity_tbps: cap / 1e12, cost: ev.cost }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{dbm_to_watt, wavelength_to_freq};

    fn ctx() -> LinkContext {
        let grid = ChannelGrid::uniform(8, 100e9, 96e9, wavelength_to_freq(1550e-9)).unwrap().with_band(Band::C);
        let fibre = FibreSpec::standard(80e3);
        let plan = BandPlan::from_grid(&grid, 5.0).unwrap();
        let solver = GnSolverConfig::new(&fibre, 40, 1.0).unwrap();
        LinkContext::new(grid, fibre, plan, solver)
    }

    #[test]
    fn throughput_identity_and_totals() {
        let c = ctx();
        let p = SegmentProfile::uniform(&c.plan, &c.grid, 0.0);
        let r = report(&p, &c).unwrap();
        let bw = c.grid.channel_bandwidth();
        assert!((r.capacity_tbps * 1e12 / (-2.0 * bw * r.cost) - 1.0).abs() < 1e-12);
        let band_sum: f64 = r.bands.iter().map(|b| b.capacity_tbps).sum();
        assert!((band_sum - r.capacity_tbps).abs() < 1e-12 * r.capacity_tbps);
        assert!((r.total_power_dbm - (0.0 + 10.0 * 8f64.log10())).abs() < 1e-9);
    }

    #[test]
    fn vanishing_power_vanishing_cost() {
        let c = ctx();
        let ev = evaluate(&c, &vec![dbm_to_watt(-60.0); 8]).unwrap();
        assert!(ev.cost < 0.0 && ev.cost > -0.1, "{}", ev.cost);
    }

    #[test]
    fn transceiver_noise_lowers_capacity() {
        let mut c = ctx();
        let p = SegmentProfile::uniform(&c.plan, &c.grid, 1.0);
        let free = report(&p, &c).unwrap();
        c.snr_trx_db = Some(20.0);
        let limited = report(&p, &c).unwrap();
        for (a, b) in free.channels.iter().zip(&limited.channels) {
            assert!(a.capacity_bps > b.capacity_bps);
        }
    }

    #[test]
    fn frozen_eta_skips_the_solver() {
        let mut c = ctx();
        let launch = vec![1e-3; 8];
        let ev = evaluate(&c, &launch).unwrap();
        c.frozen_eta = Some(ev.eta.clone());
        let again = evaluate(&c, &launch).unwrap();
        assert_eq!(ev.cost, again.cost);
        c.frozen_eta = Some(vec![0.0; 3]);
        assert!(evaluate(&c, &launch).is_err());
    }
}
