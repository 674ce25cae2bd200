//! Scenario files: TOML with the unit spelled out in every dimensional key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::band::{Band, BandWindows};
use crate::error::{Error, Result};
use crate::fibre::{
    AttenuationProfile, DispersionFit, DispersionTable, FibreSpec, FitOrder, NonlinearProfile, RamanGainCurve,
};
use crate::fibre::nonlinear::{builtin_aeff_table, DEFAULT_N2, DEFAULT_N2_REFERENCE, DEFAULT_N2_SLOPE};
use crate::gn::{ChannelIntegral, GnSolverConfig, Upsilon1Sampling, Upsilon2Sampling, DEFAULT_GRADED_FLOOR};
use crate::grid::ChannelGrid;
use crate::link::{BandPlan, LinkContext, NliModel, OptimiserOptions, ProfileMode};
use crate::ssfm::SsfmConfig;
use crate::table::Table;
use crate::units::{
    dbm_to_watt, wavelength_to_freq, PER_W_KM, PS_NM2_KM, PS_NM3_KM, PS_NM_KM, SPEED_OF_LIGHT,
};

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub seed: u64,
    /// Per-channel launch power for single-shot runs.
    pub launch_dbm: f64,
    pub fibre: FibreSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub fibre_report: FibreReportSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssfm: Option<SsfmSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimiser: Option<OptimiserSection>,
    /// Directory that relative CSV paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            seed: 1,
            launch_dbm: 0.0,
            fibre: FibreSection::default(),
            grid: GridSection::default(),
            solver: SolverSection::default(),
            fibre_report: FibreReportSection::default(),
            ssfm: None,
            optimiser: None,
            base_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispersionSource {
    /// The D/S/Ṡ coefficients given in this section.
    Coefficients,
    /// Least-squares fit of the tabulated profile about `fit_centre_nm`.
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FibreSection {
    pub span_length_km: f64,
    pub spans: usize,
    /// Flat loss; overrides the analytic profile.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attenuation_db_km: Option<f64>,
    /// Two columns: wavelength_nm, dB/km.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attenuation_csv: Option<String>,
    /// Two columns: wavelength_nm, ps/(nm·km).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion_csv: Option<String>,
    /// Two columns: wavelength_nm, µm².
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aeff_csv: Option<String>,
    pub dispersion_source: DispersionSource,
    pub fit_centre_nm: f64,
    pub fit_order: FitOrder,
    pub lambda_c_nm: f64,
    pub d_ps_nm_km: f64,
    pub s_ps_nm2_km: f64,
    pub s_dot_ps_nm3_km: f64,
    /// Wavelength-independent γ; the n₂/A_eff model is used otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_per_w_km: Option<f64>,
    pub n2_m2_per_w: f64,
    pub n2_slope_m2_per_w_nm: f64,
    pub n2_reference_nm: f64,
    /// γ this profile must hit at `gamma_calibration_nm`; rescales n₂.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_calibration_per_w_km: Option<f64>,
    pub gamma_calibration_nm: f64,
    pub raman: bool,
    pub raman_peak_gain_per_w_km: f64,
    pub raman_peak_thz: f64,
    pub raman_cutoff_thz: f64,
    pub raman_reference_aeff_um2: f64,
    /// Two columns: frequency shift THz, 1/(W·km).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raman_csv: Option<String>,
}

impl Default for FibreSection {
    fn default() -> Self {
        let r = DispersionFit::reference_link();
        FibreSection {
            span_length_km: 80.0,
            spans: 1,
            attenuation_db_km: None,
            attenuation_csv: None,
            dispersion_csv: None,
            aeff_csv: None,
            dispersion_source: DispersionSource::Coefficients,
            fit_centre_nm: 1438.0,
            fit_order: FitOrder::Second,
            lambda_c_nm: r.lambda_c * 1e9,
            d_ps_nm_km: r.d / PS_NM_KM,
            s_ps_nm2_km: r.s / PS_NM2_KM,
            s_dot_ps_nm3_km: r.s_dot / PS_NM3_KM,
            gamma_per_w_km: None,
            n2_m2_per_w: DEFAULT_N2,
            n2_slope_m2_per_w_nm: DEFAULT_N2_SLOPE * 1e-9,
            n2_reference_nm: DEFAULT_N2_REFERENCE * 1e9,
            gamma_calibration_per_w_km: Some(2.0),
            gamma_calibration_nm: 1302.3,
            raman: true,
            raman_peak_gain_per_w_km: 0.39,
            raman_peak_thz: 13.2,
            raman_cutoff_thz: 30.0,
            raman_reference_aeff_um2: 80.0,
            raman_csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// `"reference"` builds the 589-channel O-to-U grid and ignores the fields below.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub channels: usize,
    pub spacing_ghz: f64,
    pub symbol_rate_gbaud: f64,
    pub centre_nm: f64,
    /// Labels every channel with one band; otherwise the default windows apply.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<String>,
    pub guard_gap_nm: f64,
    pub guards: Vec<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            preset: None,
            channels: 5,
            spacing_ghz: 100.0,
            symbol_rate_gbaud: 96.0,
            centre_nm: 1438.0,
            band: None,
            guard_gap_nm: 5.0,
            guards: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub n_riemann: usize,
    pub mean_steps_per_km: f64,
    /// Thread count; left out of hashes and metadata since results do not depend on it.
    #[serde(skip_serializing)]
    pub workers: usize,
    /// `"graded"` or `"uniform"`.
    pub upsilon1: String,
    pub graded_floor: f64,
    /// `"active"` or `"uniform"`.
    pub upsilon2: String,
    pub channel_integral: ChannelIntegral,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            n_riemann: 150,
            mean_steps_per_km: 1.4,
            workers: 1,
            upsilon1: "graded".into(),
            graded_floor: DEFAULT_GRADED_FLOOR,
            upsilon2: "active".into(),
            channel_integral: ChannelIntegral::Centre,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FibreReportSection {
    pub lambda_min_nm: f64,
    pub lambda_max_nm: f64,
    pub lambda_step_nm: f64,
}

impl Default for FibreReportSection {
    fn default() -> Self {
        FibreReportSection { lambda_min_nm: 1260.0, lambda_max_nm: 1675.0, lambda_step_nm: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsfmSection {
    pub symbols_log2: u32,
    pub samples_per_symbol: usize,
    pub rolloff: f64,
    pub goal_local_error: f64,
    pub include_isrs: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_steps: Option<usize>,
    pub min_step_m: f64,
}

impl Default for SsfmSection {
    fn default() -> Self {
        let d = SsfmConfig::default();
        SsfmSection {
            symbols_log2: d.symbols_per_channel.trailing_zeros(),
            samples_per_symbol: d.samples_per_symbol,
            rolloff: d.rolloff,
            goal_local_error: d.goal_local_error,
            include_isrs: d.include_isrs,
            fixed_steps: None,
            min_step_m: d.min_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimiserSection {
    pub mode: ProfileMode,
    pub model: NliModel,
    pub initial_dbm: f64,
    pub lower_dbm: f64,
    pub upper_dbm: f64,
    pub fd_step_db: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub memory: usize,
    pub max_step_db: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_trx_db: Option<f64>,
    /// Holds η at its value for the initial profile.
    pub freeze_eta: bool,
    /// Band label → noise figure [dB].
    pub noise_figure_db: BTreeMap<String, f64>,
    /// Band label → segment bandwidth B_p [GHz].
    pub segment_bandwidth_ghz: BTreeMap<String, f64>,
    /// Coarse first phase before a refinement at the main solver settings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse: Option<CoarseSection>,
}

impl Default for OptimiserSection {
    fn default() -> Self {
        let o = OptimiserOptions::default();
        OptimiserSection {
            mode: o.mode,
            model: NliModel::Integral,
            initial_dbm: 0.0,
            lower_dbm: o.lower_dbm,
            upper_dbm: o.upper_dbm,
            fd_step_db: o.fd_step_db,
            grad_tol: o.grad_tol,
            max_iter: o.max_iter,
            memory: o.memory,
            max_step_db: o.max_step_db,
            snr_trx_db: None,
            freeze_eta: false,
            noise_figure_db: BTreeMap::new(),
            segment_bandwidth_ghz: BTreeMap::new(),
            coarse: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseSection {
    pub n_riemann: usize,
    pub mean_steps_per_km: f64,
    #[serde(default)]
    pub model: Option<NliModel>,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Self::parse(&text, dir)
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self> {
        let mut s: Scenario = toml::from_str(text).map_err(|e| config(e.to_string()))?;
        s.base_dir = base_dir;
        s.check_files()?;
        Ok(s)
    }

    fn resolve(&self, file: &str) -> PathBuf {
        let p = Path::new(file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    fn check_files(&self) -> Result<()> {
        let f = &self.fibre;
        for file in [&f.attenuation_csv, &f.dispersion_csv, &f.aeff_csv, &f.raman_csv].into_iter().flatten() {
            let p = self.resolve(file);
            if !p.is_file() {
                return Err(config(format!("referenced file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Canonical TOML of everything that affects results.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    pub fn fibre_spec(&self) -> Result<FibreSpec> {
        let f = &self.fibre;
        if f.spans == 0 || !(f.span_length_km > 0.0) {
            return Err(config("fibre needs at least one span of positive length"));
        }
        let span = f.span_length_km * 1e3;
        let mut fibre = FibreSpec::standard(span * f.spans as f64).with_spans(vec![span; f.spans])?;

        let mut att = AttenuationProfile::standard_smf();
        if let Some(a) = f.attenuation_db_km {
            att = AttenuationProfile::flat(a);
        }
        if let Some(file) = &f.attenuation_csv {
            att = att.with_table(Table::from_csv(&self.resolve(file), 1e-9, 1.0)?);
        }
        fibre.attenuation = att;

        if let Some(file) = &f.dispersion_csv {
            fibre.dispersion_table = DispersionTable { table: Table::from_csv(&self.resolve(file), 1e-9, PS_NM_KM)? };
        }
        fibre.dispersion = match f.dispersion_source {
            DispersionSource::Coefficients => DispersionFit {
                lambda_c: f.lambda_c_nm * 1e-9,
                d: f.d_ps_nm_km * PS_NM_KM,
                s: f.s_ps_nm2_km * PS_NM2_KM,
                s_dot: f.s_dot_ps_nm3_km * PS_NM3_KM,
                order: f.fit_order,
            },
            DispersionSource::Table => fibre.dispersion_table.fit(f.fit_centre_nm * 1e-9, f.fit_order)?,
        };

        let aeff = match &f.aeff_csv {
            Some(file) => Table::from_csv(&self.resolve(file), 1e-9, 1e-12)?,
            None => builtin_aeff_table(),
        };
        let calibration = f.gamma_calibration_per_w_km.map(|g| (f.gamma_calibration_nm * 1e-9, g * PER_W_KM));
        let mut nl = NonlinearProfile::new(
            f.n2_m2_per_w,
            f.n2_slope_m2_per_w_nm * 1e9,
            f.n2_reference_nm * 1e-9,
            aeff,
            calibration,
        )?;
        if let Some(g) = f.gamma_per_w_km {
            nl = nl.with_constant_gamma(g * PER_W_KM);
        }
        fibre.nonlinear = nl;

        fibre.raman = if !f.raman {
            RamanGainCurve::disabled()
        } else if let Some(file) = &f.raman_csv {
            RamanGainCurve::new(Table::from_csv(&self.resolve(file), 1e12, PER_W_KM)?, f.raman_reference_aeff_um2 * 1e-12)
        } else {
            RamanGainCurve::triangular(
                f.raman_peak_gain_per_w_km * PER_W_KM,
                f.raman_peak_thz * 1e12,
                f.raman_cutoff_thz * 1e12,
                f.raman_reference_aeff_um2 * 1e-12,
            )?
        };
        fibre.validate()?;
        Ok(fibre)
    }

    pub fn channel_grid(&self) -> Result<ChannelGrid> {
        let g = &self.grid;
        let windows = BandWindows { guard_gap_nm: g.guard_gap_nm, ..BandWindows::default() };
        let grid = match g.preset.as_deref() {
            Some("reference") => {
                ChannelGrid::uniform(589, 100e9, 96e9, wavelength_to_freq(1438e-9))?.with_band_windows(&windows)?
            }
            Some(other) => return Err(config(format!("unknown grid preset {other:?}"))),
            None => {
                let grid = ChannelGrid::uniform(
                    g.channels,
                    g.spacing_ghz * 1e9,
                    g.symbol_rate_gbaud * 1e9,
                    SPEED_OF_LIGHT / (g.centre_nm * 1e-9),
                )?;
                match &g.band {
                    Some(b) => grid.with_band(b.parse()?),
                    None => grid.with_band_windows(&windows)?,
                }
            }
        };
        grid.with_guards(&g.guards)
    }

    pub fn launch_watts(&self, grid: &ChannelGrid) -> Vec<f64> {
        let mut p = vec![dbm_to_watt(self.launch_dbm); grid.len()];
        grid.mask_guards(&mut p);
        p
    }

    pub fn solver_config(&self, fibre: &FibreSpec) -> Result<GnSolverConfig> {
        let s = &self.solver;
        let mut cfg = GnSolverConfig::new(fibre, s.n_riemann, s.mean_steps_per_km)?;
        cfg.worker_count = s.workers;
        cfg.upsilon1 = match s.upsilon1.as_str() {
            "graded" => Upsilon1Sampling::Graded { floor: s.graded_floor },
            "uniform" => Upsilon1Sampling::Uniform,
            other => return Err(config(format!("unknown υ1 sampling {other:?}"))),
        };
        cfg.upsilon2 = match s.upsilon2.as_str() {
            "active" => Upsilon2Sampling::Active,
            "uniform" => Upsilon2Sampling::Uniform,
            other => return Err(config(format!("unknown υ2 sampling {other:?}"))),
        };
        cfg.channel_integral = s.channel_integral;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn ssfm_config(&self) -> Result<SsfmConfig> {
        let s = self.ssfm.as_ref().ok_or_else(|| config("scenario has no [ssfm] section"))?;
        if s.symbols_log2 >= 31 {
            return Err(config("symbols_log2 is too large"));
        }
        let cfg = SsfmConfig {
            symbols_per_channel: 1 << s.symbols_log2,
            samples_per_symbol: s.samples_per_symbol,
            rolloff: s.rolloff,
            goal_local_error: s.goal_local_error,
            rng_seed: self.seed,
            include_isrs: s.include_isrs,
            fixed_steps: s.fixed_steps,
            betas: None,
            min_step: s.min_step_m,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn optimiser(&self) -> Result<&OptimiserSection> {
        self.optimiser.as_ref().ok_or_else(|| config("scenario has no [optimiser] section"))
    }

    pub fn optimiser_options(&self) -> Result<OptimiserOptions> {
        let o = self.optimiser()?;
        let opts = OptimiserOptions {
            mode: o.mode,
            lower_dbm: o.lower_dbm,
            upper_dbm: o.upper_dbm,
            fd_step_db: o.fd_step_db,
            grad_tol: o.grad_tol,
            max_iter: o.max_iter,
            memory: o.memory,
            max_step_db: o.max_step_db,
        };
        opts.validate()?;
        Ok(opts)
    }

    /// Band plan with any per-band overrides from the optimiser section.
    pub fn band_plan(&self, grid: &ChannelGrid) -> Result<BandPlan> {
        let mut plan = BandPlan::from_grid(grid, self.grid.guard_gap_nm)?;
        if let Some(o) = &self.optimiser {
            for (label, &nf) in &o.noise_figure_db {
                plan = plan.with_noise_figure(label.parse::<Band>()?, nf);
            }
            for (label, &bp) in &o.segment_bandwidth_ghz {
                if !(bp > 0.0) {
                    return Err(config(format!("segment bandwidth of band {label} must be positive")));
                }
                plan = plan.with_segment_bandwidth(label.parse::<Band>()?, bp * 1e9);
            }
        }
        Ok(plan)
    }

    /// Optimisation context at the main solver settings.
    pub fn link_context(&self) -> Result<LinkContext> {
        let fibre = self.fibre_spec()?;
        let grid = self.channel_grid()?;
        let plan = self.band_plan(&grid)?;
        let solver = self.solver_config(&fibre)?;
        let mut ctx = LinkContext::new(grid, fibre, plan, solver);
        if let Some(o) = &self.optimiser {
            ctx.model = o.model;
            ctx.snr_trx_db = o.snr_trx_db;
        }
        Ok(ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let s = Scenario::parse("", ".".into()).unwrap();
        assert_eq!(s, Scenario::default());
        let fibre = s.fibre_spec().unwrap();
        assert_eq!(fibre.dispersion, DispersionFit::reference_link());
        assert_eq!(s.channel_grid().unwrap().len(), 5);
    }

    #[test]
    fn unit_suffixed_keys_parse() {
        let s = Scenario::parse(
            r#"
            launch_dbm = 2.0
            [fibre]
            span_length_km = 40
            spans = 2
            gamma_per_w_km = 1.3
            raman = false
            [grid]
            channels = 3
            spacing_ghz = 50
            symbol_rate_gbaud = 32
            centre_nm = 1550
            band = "C"
            [optimiser]
            mode = "uniform"
            noise_figure_db = { C = 4.5 }
            "#,
            ".".into(),
        )
        .unwrap();
        let fibre = s.fibre_spec().unwrap();
        assert_eq!(fibre.span_lengths, vec![40e3, 40e3]);
        assert!(fibre.raman.is_disabled());
        assert!((fibre.gamma_at_freq(193e12).unwrap() - 1.3e-3).abs() < 1e-15);
        let grid = s.channel_grid().unwrap();
        assert_eq!(grid.spacing(), 50e9);
        let plan = s.band_plan(&grid).unwrap();
        assert_eq!(plan.get(Band::C).unwrap().noise_figure_db, 4.5);
        assert_eq!(s.optimiser_options().unwrap().mode, ProfileMode::Uniform);
    }

    #[test]
    fn typos_and_missing_files_are_config_errors() {
        let e = Scenario::parse("[grid]\nspacing_gz = 50", ".".into()).unwrap_err();
        assert!(e.is_config());
        let e = Scenario::parse("[fibre]\naeff_csv = \"missing.csv\"", ".".into()).unwrap_err();
        assert!(e.is_config());
    }

    #[test]
    fn hash_ignores_workers() {
        let a = Scenario::default();
        let mut b = a.clone();
        b.solver.workers = 8;
        assert_eq!(a.hash(), b.hash());
        b.seed = 2;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn reference_preset_has_the_full_grid() {
        let s = Scenario::parse("[grid]\npreset = \"reference\"", ".".into()).unwrap();
        assert_eq!(s.channel_grid().unwrap().len(), 589);
    }
}
