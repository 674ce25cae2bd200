use std::time::Instant;

use uwb_nli::cfm::cfm_nli;
use uwb_nli::fibre::{BetaCoefficients, FibreSpec, FitOrder};
use uwb_nli::gn::{all_channels_nli, GnSolverConfig, NliResult};
use uwb_nli::grid::ChannelGrid;
use uwb_nli::raman::{build_distance_grid, solve_power_evolution, PowerEvolution};
use uwb_nli::units::{dbm_to_watt, linear_to_db, wavelength_to_freq, PER_W_KM, PS2_KM};

struct Case {
    grid: ChannelGrid,
    fibre: FibreSpec,
    evo: PowerEvolution,
    cfg: GnSolverConfig,
    psd: Vec<f64>,
}

impl Case {
    fn new(grid: ChannelGrid, fibre: FibreSpec, cfg: GnSolverConfig, dbm: f64) -> Self {
        let n = grid.len();
        let p = dbm_to_watt(dbm);
        let dist = build_distance_grid(fibre.length, cfg.mean_steps_per_km).unwrap();
        let evo = solve_power_evolution(&fibre, &grid, &vec![p; n], &dist).unwrap();
        let psd = vec![p / grid.channel_bandwidth(); n];
        Case { grid, fibre, evo, cfg, psd }
    }

    fn integral(&self) -> NliResult {
        all_channels_nli(&self.grid, std::slice::from_ref(&self.evo), &self.fibre, &self.cfg, &self.psd).unwrap()
    }

    fn closed_form(&self) -> NliResult {
        cfm_nli(&self.grid, std::slice::from_ref(&self.evo), &self.fibre, &self.cfg, &self.psd).unwrap()
    }
}

fn high_dispersion(n: usize) -> Case {
    let fibre = FibreSpec::standard(80e3).with_constant_gamma(1.3 * PER_W_KM).without_raman();
    let grid = ChannelGrid::uniform(n, 100e9, 96e9, wavelength_to_freq(1550e-9)).unwrap();
    let b = BetaCoefficients { beta2: -21.0 * PS2_KM, beta3: 0.0, beta4: 0.0, at_wavelength: 1550e-9 };
    Case::new(grid, fibre, GnSolverConfig::with_betas(b, 150, 1.0), 0.0)
}

#[test]
fn tracks_the_integral_far_from_zero_dispersion() {
    let c = high_dispersion(5);
    let gn = c.integral();
    let cf = c.closed_form();
    for i in 0..5 {
        let d = linear_to_db(cf.eta[i]) - linear_to_db(gn.eta[i]);
        assert!(d.abs() < 1.0, "channel {i}: closed form off by {d} dB");
    }
}

#[test]
fn underestimates_near_zero_dispersion() {
    let fibre = FibreSpec::standard(80e3)
        .with_constant_gamma(2.0 * PER_W_KM)
        .without_raman()
        .with_table_fit(1302.3e-9, FitOrder::Second)
        .unwrap();
    let grid = ChannelGrid::uniform(5, 100e9, 96e9, wavelength_to_freq(1302.3e-9)).unwrap();
    let cfg = GnSolverConfig::new(&fibre, 150, 1.4).unwrap();
    let c = Case::new(grid, fibre, cfg, 2.0);
    let gn = c.integral();
    let cf = c.closed_form();
    let gap: Vec<f64> = (0..5).map(|i| linear_to_db(cf.eta[i]) - linear_to_db(gn.eta[i])).collect();
    let worst = gap.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
    // Multi-channel FWM is phase matched here and the closed form has no term for it.
    assert!(worst < 0.0, "gaps {gap:?}");
}

#[test]
fn is_much_cheaper_than_the_integral() {
    let c = high_dispersion(16);
    let t = Instant::now();
    let _ = c.integral();
    let slow = t.elapsed();
    let t = Instant::now();
    for _ in 0..10 {
        let _ = c.closed_form();
    }
    let fast = t.elapsed() / 10;
    assert!(slow > 100 * fast, "integral {slow:?}, closed form {fast:?}");
}

