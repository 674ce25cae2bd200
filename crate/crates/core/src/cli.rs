//! Command-line front end. Each subcommand writes CSVs into `--out-dir` and a short
//! summary (including wall-clock time) to stdout.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::cfm::cfm_nli;
use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::fibre::FibreSpec;
use crate::gn::{all_channels_nli, GnSolverConfig};
use crate::grid::ChannelGrid;
use crate::io::{self, Metadata};
use crate::link::{evaluate, optimise, optimise_two_phase, NliModel, SegmentProfile};
use crate::raman::{build_distance_grid_with, solve_power_evolution, PowerEvolution};
use crate::ssfm::{extract_eta, generate_waveform, propagate};
use crate::units::linear_to_db;

#[derive(Debug, Parser)]
#[command(name = "uwbnli", version, about = "NLI, SNR and launch-power tools for ultrawideband links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// α, D, γ and A_eff against wavelength.
    Fibre,
    /// Per-channel η from the integral or closed-form model.
    Nli,
    /// Integral model against the split-step simulator.
    Validate,
    /// Launch-power optimisation.
    Optimize,
    /// ρ(z, f) on the Raman distance grid.
    PowerEvolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Integral,
    Cfm,
}

impl From<ModelArg> for NliModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Integral => NliModel::Integral,
            ModelArg::Cfm => NliModel::Cfm,
        }
    }
}

fn model_name(m: NliModel) -> &'static str {
    match m {
        NliModel::Integral => "integral",
        NliModel::Cfm => "cfm",
    }
}

/// Exit status for an error: 2 for configuration problems, 3 for solver failures.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        3
    }
}

pub fn load_scenario(cli: &Cli) -> Result<Scenario> {
    let mut s = match &cli.scenario {
        Some(p) => Scenario::from_path(p)?,
        None => Scenario::default(),
    };
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        s.solver.workers = w;
    }
    if let (Some(m), Some(o)) = (cli.model, s.optimiser.as_mut()) {
        o.model = m.into();
    }
    Ok(s)
}

pub fn run(cli: &Cli) -> Result<()> {
    let scenario = load_scenario(cli)?;
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| Error::Config(format!("{}: {e}", cli.out_dir.display())))?;
    match cli.command {
        Command::Fibre => cmd_fibre(&scenario, cli),
        Command::Nli => cmd_nli(&scenario, cli),
        Command::Validate => cmd_validate(&scenario, cli),
        Command::Optimize => cmd_optimize(&scenario, cli),
        Command::PowerEvolution => cmd_power_evolution(&scenario, cli),
    }
}

fn evolutions(fibre: &FibreSpec, grid: &ChannelGrid, launch: &[f64], cfg: &GnSolverConfig) -> Result<Vec<PowerEvolution>> {
    fibre
        .span_lengths
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let dist = build_distance_grid_with(l, cfg.mean_steps_per_km, cfg.log_scale, k)?;
            solve_power_evolution(fibre, grid, launch, &dist)
        })
        .collect()
}

fn cmd_fibre(s: &Scenario, cli: &Cli) -> Result<()> {
    let fibre = s.fibre_spec()?;
    let r = &s.fibre_report;
    let rows = io::fibre_rows(&fibre, r.lambda_min_nm, r.lambda_max_nm, r.lambda_step_nm)?;
    let path = cli.out_dir.join("fibre.csv");
    io::write_csv(&path, &Metadata::for_scenario(s, "fibre"), &io::FIBRE_HEADER, &rows)?;
    println!("fibre: {} rows -> {}", rows.len(), path.display());
    Ok(())
}

fn cmd_nli(s: &Scenario, cli: &Cli) -> Result<()> {
    let model: NliModel = cli.model.map(Into::into).unwrap_or(NliModel::Integral);
    let fibre = s.fibre_spec()?;
    let grid = s.channel_grid()?;
    let cfg = s.solver_config(&fibre)?;
    let launch = s.launch_watts(&grid);
    let t = Instant::now();
    let evos = evolutions(&fibre, &grid, &launch, &cfg)?;
    let psd: Vec<f64> = launch.iter().map(|p| p / grid.channel_bandwidth()).collect();
    let nli = match model {
        NliModel::Integral => all_channels_nli(&grid, &evos, &fibre, &cfg, &psd)?,
        NliModel::Cfm => cfm_nli(&grid, &evos, &fibre, &cfg, &psd)?,
    };
    let elapsed = t.elapsed();
    let name = model_name(model);
    let path = cli.out_dir.join(format!("nli_{name}.csv"));
    let meta = Metadata::for_scenario(s, "nli").with("model", name);
    io::write_csv(&path, &meta, &io::NLI_HEADER, &io::nli_rows(&grid, &launch, &nli))?;
    println!(
        "nli: model={name} channels={} N_R={} N_M/km={} workers={} time={:.3} s -> {}",
        grid.len(),
        cfg.n_riemann,
        cfg.mean_steps_per_km,
        cfg.worker_count,
        elapsed.as_secs_f64(),
        path.display()
    );
    Ok(())
}

fn cmd_validate(s: &Scenario, cli: &Cli) -> Result<()> {
    let fibre = s.fibre_spec()?;
    let grid = s.channel_grid()?;
    let cfg = s.solver_config(&fibre)?;
    let scfg = s.ssfm_config()?;
    let launch = s.launch_watts(&grid);
    let channels = grid.active();

    let t = Instant::now();
    let evos = evolutions(&fibre, &grid, &launch, &cfg)?;
    let psd: Vec<f64> = launch.iter().map(|p| p / grid.channel_bandwidth()).collect();
    let gn = all_channels_nli(&grid, &evos, &fibre, &cfg, &psd)?;
    let gn_eta: Vec<f64> = channels.iter().map(|&i| gn.eta[i]).collect();
    let t_gn = t.elapsed();

    let t = Instant::now();
    let w = generate_waveform(&grid, &launch, &scfg)?;
    let (rx, stats) = propagate(w.field, &fibre, &scfg)?;
    let ssfm_eta = extract_eta(&rx, &w.reference, &fibre, &scfg, &channels)?;
    let t_ssfm = t.elapsed();

    let rows = io::validate_rows(&grid, &channels, &gn_eta, &ssfm_eta);
    let path = cli.out_dir.join("validate.csv");
    let meta = Metadata::for_scenario(s, "validate")
        .with("symbols_per_channel", scfg.symbols_per_channel)
        .with("goal_local_error", scfg.goal_local_error);
    io::write_csv(&path, &meta, &io::VALIDATE_HEADER, &rows)?;
    let deltas: Vec<f64> =
        gn_eta.iter().zip(&ssfm_eta).map(|(a, b)| (linear_to_db(*a) - linear_to_db(*b)).abs()).collect();
    let mean = deltas.iter().sum::<f64>() / deltas.len().max(1) as f64;
    println!(
        "validate: mean |delta| = {mean:.3} dB; GN {:.2} s, SSFM {:.2} s ({} steps, {} rejected) -> {}",
        t_gn.as_secs_f64(),
        t_ssfm.as_secs_f64(),
        stats.accepted,
        stats.rejected,
        path.display()
    );
    Ok(())
}

fn cmd_optimize(s: &Scenario, cli: &Cli) -> Result<()> {
    let o = s.optimiser()?;
    let opts = s.optimiser_options()?;
    let mut ctx = s.link_context()?;
    let initial = SegmentProfile::uniform(&ctx.plan, &ctx.grid, o.initial_dbm);
    if o.freeze_eta {
        let launch = initial.channel_watts(&ctx.plan, &ctx.grid)?;
        ctx.frozen_eta = Some(evaluate(&ctx, &launch)?.eta);
    }
    let t = Instant::now();
    let result = match &o.coarse {
        Some(c) => {
            let mut coarse = ctx.clone();
            coarse.solver.n_riemann = c.n_riemann;
            coarse.solver.mean_steps_per_km = c.mean_steps_per_km;
            coarse.solver.validate()?;
            if let Some(m) = c.model {
                coarse.model = m;
            }
            let (first, second) = optimise_two_phase(&initial, &coarse, &ctx, &opts)?;
            println!(
                "optimize: coarse phase {} iterations, cost {:.6}",
                first.iterations, first.report.cost
            );
            second
        }
        None => optimise(&initial, &ctx, &opts)?,
    };
    let elapsed = t.elapsed();
    let meta = Metadata::for_scenario(s, "optimize")
        .with("model", model_name(ctx.model))
        .with("converged", result.converged)
        .with("iterations", result.iterations);
    io::write_csv(&cli.out_dir.join("profile.csv"), &meta, &io::PROFILE_HEADER, &io::profile_rows(&result.profile))?;
    io::write_csv(&cli.out_dir.join("report.csv"), &meta, &io::REPORT_HEADER, &io::report_rows(&result.report))?;
    io::write_csv(&cli.out_dir.join("bands.csv"), &meta, &io::BANDS_HEADER, &io::band_rows(&result.report))?;
    println!(
        "optimize: converged={} iterations={} max|grad|={:.4} total={:.2} dBm throughput={:.3} Tbps time={:.1} s",
        result.converged,
        result.iterations,
        result.max_gradient,
        result.report.total_power_dbm,
        result.report.capacity_tbps,
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn cmd_power_evolution(s: &Scenario, cli: &Cli) -> Result<()> {
    let fibre = s.fibre_spec()?;
    let grid = s.channel_grid()?;
    let cfg = s.solver_config(&fibre)?;
    let launch = s.launch_watts(&grid);
    let evos = evolutions(&fibre, &grid, &launch, &cfg)?;
    let (header, rows) = io::rho_table(&evos);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let path = cli.out_dir.join("power_evolution.csv");
    io::write_csv(&path, &Metadata::for_scenario(s, "power-evolution"), &header, &rows)?;
    println!("power-evolution: {} spans, {} rows -> {}", evos.len(), rows.len(), path.display());
    Ok(())
}
