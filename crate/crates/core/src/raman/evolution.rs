use log::debug;

use super::grid::DistanceGrid;
use crate::error::{invalid, Error, Result};
use crate::fibre::{raman_gain_between, FibreSpec};
use crate::grid::ChannelGrid;
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::table::bracket;

/// Normalised power ρ(z̃_m, f_i) on one span, stored as ln ρ.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerEvolution {
    pub grid: DistanceGrid,
    freqs: Vec<f64>,
    launch: Vec<f64>,
    /// Row-major [step][channel].
    log_rho: Vec<f64>,
    log_rho_end: Vec<f64>,
    hull: (f64, f64),
    pub stats: OdeStats,
}

impl PowerEvolution {
    pub fn channel_count(&self) -> usize {
        self.freqs.len()
    }

    pub fn step_count(&self) -> usize {
        self.grid.step_count()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn launch_powers(&self) -> &[f64] {
        &self.launch
    }

    pub fn rho(&self, m: usize, i: usize) -> f64 {
        self.log_rho[m * self.freqs.len() + i].exp()
    }

    pub fn log_rho(&self, m: usize, i: usize) -> f64 {
        self.log_rho[m * self.freqs.len() + i]
    }

    /// ρ(L, f_i).
    pub fn rho_end(&self, i: usize) -> f64 {
        self.log_rho_end[i].exp()
    }

    /// Output power P_i(L) [W].
    pub fn power_end(&self, i: usize) -> f64 {
        self.launch[i] * self.rho_end(i)
    }

    /// Frequencies at which ρ may be queried: the channel centres extended by half a spacing.
    pub fn hull(&self) -> (f64, f64) {
        self.hull
    }

    /// Bracket (j, t) for log-linear interpolation at `f`, or a hull error.
    #[inline]
    pub fn locate(&self, f: f64) -> Result<(usize, f64)> {
        if f < self.hull.0 || f > self.hull.1 || !f.is_finite() {
            return Err(Error::HullViolation { freq_hz: f });
        }
        Ok(bracket(&self.freqs, f))
    }

    /// ln ρ(z̃_m, f) interpolated linearly in frequency, held flat beyond the outer channels.
    pub fn log_rho_at(&self, m: usize, f: f64) -> Result<f64> {
        let (j, t) = self.locate(f)?;
        let row = &self.log_rho[m * self.freqs.len()..(m + 1) * self.freqs.len()];
        Ok(if j + 1 < row.len() { (1.0 - t) * row[j] + t * row[j + 1] } else { row[j] })
    }

    /// ln ρ laid out channel-major: entry [i·N_steps + m].
    pub fn log_rho_channel_major(&self) -> Vec<f64> {
        let (nc, nm) = (self.freqs.len(), self.step_count());
        let mut out = vec![0.0; nc * nm];
        for m in 0..nm {
            for i in 0..nc {
                out[i * nm + m] = self.log_rho[m * nc + i];
            }
        }
        out
    }
}

/// Raman coupling matrix K with dy_i/dz = −α_i + Σ_j K_ij·P_j for y = ln P.
/// K_ij = +C_ij when f_j > f_i and −(f_i/f_j)·C_ij when f_j < f_i, so photon flux is conserved.
pub(crate) fn coupling_matrix(fibre: &FibreSpec, freqs: &[f64]) -> Result<Vec<f64>> {
    let n = freqs.len();
    let mut k = vec![0.0; n * n];
    if fibre.raman.is_disabled() {
        return Ok(k);
    }
    let aeff: Vec<f64> = freqs.iter().map(|&f| fibre.aeff_at_freq(f)).collect::<Result<_>>()?;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (fi, fj) = (freqs[i], freqs[j]);
            let lower = if fi < fj { i } else { j };
            let c = raman_gain_between(&fibre.raman, fi.max(fj), fi.min(fj), aeff[lower]);
            k[i * n + j] = if fj > fi { c } else { -(fi / fj) * c };
        }
    }
    Ok(k)
}

/// Integrates the attenuation + ISRS power equations over one span.
pub fn solve_power_evolution(fibre: &FibreSpec, grid: &ChannelGrid, launch: &[f64], dist: &DistanceGrid) -> Result<PowerEvolution> {
    solve_power_evolution_with(fibre, grid, launch, dist, &OdeOptions { rtol: 1e-10, atol: 1e-11, ..Default::default() })
}

pub fn solve_power_evolution_with(
    fibre: &FibreSpec,
    grid: &ChannelGrid,
    launch: &[f64],
    dist: &DistanceGrid,
    opts: &OdeOptions,
) -> Result<PowerEvolution> {
    let n = grid.len();
    if launch.len() != n {
        return Err(invalid(format!("expected {n} launch powers, got {}", launch.len())));
    }
    if launch.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("launch powers must be finite and non-negative"));
    }
    if !launch.iter().any(|&p| p > 0.0) {
        return Err(invalid("at least one channel must carry power"));
    }
    let freqs = grid.freqs().to_vec();
    let alpha: Vec<f64> = freqs.iter().map(|&f| fibre.alpha_at_freq(f)).collect::<Result<_>>()?;
    let k = coupling_matrix(fibre, &freqs)?;
    // Fold launch powers into the coupling so the state is ln ρ directly.
    let kp: Vec<f64> = (0..n * n).map(|ij| k[ij] * launch[ij % n]).collect();
    let raman_on = kp.iter().any(|&v| v != 0.0);

    let mut outputs = dist.eval_points.clone();
    outputs.push(dist.length());
    let mut rho_buf = vec![0.0; n];
    let rhs = |_z: f64, y: &[f64], dy: &mut [f64]| {
        if raman_on {
            for (r, &v) in rho_buf.iter_mut().zip(y) {
                *r = v.exp();
            }
            for i in 0..n {
                let row = &kp[i * n..(i + 1) * n];
                let mut acc = 0.0;
                for (a, b) in row.iter().zip(&rho_buf) {
                    acc += a * b;
                }
                dy[i] = acc - alpha[i];
            }
        } else {
            dy.copy_from_slice(&alpha);
            dy.iter_mut().for_each(|v| *v = -*v);
        }
    };
    let (states, stats) = integrate(rhs, 0.0, &vec![0.0; n], &outputs, opts)?;
    debug!("power evolution: {} accepted / {} rejected steps", stats.accepted, stats.rejected);

    let steps = dist.step_count();
    let mut log_rho = Vec::with_capacity(steps * n);
    for s in &states[..steps] {
        log_rho.extend_from_slice(s);
    }
    let log_rho_end = states[steps].clone();
    if log_rho.iter().chain(&log_rho_end).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("power evolution".into()));
    }
    let half = 0.5 * grid.spacing();
    Ok(PowerEvolution {
        grid: dist.clone(),
        hull: (freqs[0] - half, freqs[n - 1] + half),
        freqs,
        launch: launch.to_vec(),
        log_rho,
        log_rho_end,
        stats,
    })
}

/// √(ρ(f1)·ρ(f2)·ρ(f1+f2−f)/ρ(f)) at step m.
pub fn p_k_factor(evo: &PowerEvolution, f1: f64, f2: f64, f: f64, m: usize) -> Result<f64> {
    let l = evo.log_rho_at(m, f1)? + evo.log_rho_at(m, f2)? + evo.log_rho_at(m, f1 + f2 - f)? - evo.log_rho_at(m, f)?;
    Ok((0.5 * l).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raman::build_distance_grid;
    use crate::units::db_per_km_to_per_m;

    fn flat_fibre(db_km: f64) -> FibreSpec {
        FibreSpec::standard(80e3).with_flat_attenuation(db_km)
    }

    #[test]
    fn loss_only_is_exponential() {
        let fibre = flat_fibre(0.2).without_raman();
        let grid = ChannelGrid::uniform(4, 100e9, 96e9, 193e12).unwrap();
        let dist = build_distance_grid(80e3, 1.0).unwrap();
        let evo = solve_power_evolution(&fibre, &grid, &[1e-3; 4], &dist).unwrap();
        let a = db_per_km_to_per_m(0.2);
        for m in 0..evo.step_count() {
            let exact = (-a * dist.eval_points[m]).exp();
            assert!((evo.rho(m, 2) / exact - 1.0).abs() < 1e-6);
        }
        assert!((evo.rho_end(0) / (-a * 80e3).exp() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lossless_pair_conserves_photons() {
        let fibre = flat_fibre(0.0);
        let grid = ChannelGrid::from_freqs(vec![190e12, 203.2e12], 96e9, 100e9, 196.6e12).unwrap();
        let dist = build_distance_grid(80e3, 1.0).unwrap();
        let p0 = 0.1;
        let evo = solve_power_evolution(&fibre, &grid, &[p0, p0], &dist).unwrap();
        let flux0 = p0 / 190e12 + p0 / 203.2e12;
        let mut prev = 0.0;
        for m in 0..evo.step_count() {
            let flux = p0 * evo.rho(m, 0) / 190e12 + p0 * evo.rho(m, 1) / 203.2e12;
            assert!((flux / flux0 - 1.0).abs() < 1e-6);
            assert!(evo.rho(m, 0) > prev);
            prev = evo.rho(m, 0);
        }
        assert!(evo.rho_end(0) > 1.0 && evo.rho_end(1) < 1.0);
    }

    #[test]
    fn p_k_collapses() {
        let fibre = flat_fibre(0.2).without_raman();
        let grid = ChannelGrid::uniform(3, 100e9, 96e9, 193e12).unwrap();
        let dist = build_distance_grid(80e3, 1.0).unwrap();
        let evo = solve_power_evolution(&fibre, &grid, &[1e-3; 3], &dist).unwrap();
        let f = 193e12;
        let p = p_k_factor(&evo, f, f, f, 3).unwrap();
        assert!((p - evo.rho(3, 1)).abs() < 1e-14);
        let a = db_per_km_to_per_m(0.2);
        let p = p_k_factor(&evo, f + 50e9, f - 80e9, f, 5).unwrap();
        assert!((p / (-a * dist.eval_points[5]).exp() - 1.0).abs() < 1e-6);
        assert!((p_k_factor(&evo, f, f + 10e9, f, 0).unwrap() - 1.0).abs() < 1e-2);
        assert!(matches!(p_k_factor(&evo, f + 200e9, f, f, 0), Err(Error::HullViolation { .. })));
    }

    #[test]
    fn rejects_bad_launch() {
        let fibre = flat_fibre(0.2);
        let grid = ChannelGrid::uniform(2, 100e9, 96e9, 193e12).unwrap();
        let dist = build_distance_grid(80e3, 1.0).unwrap();
        assert!(solve_power_evolution(&fibre, &grid, &[0.0, 0.0], &dist).is_err());
        assert!(solve_power_evolution(&fibre, &grid, &[-1e-3, 1e-3], &dist).is_err());
        assert!(solve_power_evolution(&fibre, &grid, &[1e-3], &dist).is_err());
    }
}
