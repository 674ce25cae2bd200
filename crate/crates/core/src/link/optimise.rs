use std::collections::VecDeque;

use log::info;
use serde::{Deserialize, Serialize};

use super::cost::{evaluate, report_from, LinkContext, LinkReport};
use super::profile::SegmentProfile;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMode {
    /// One power shared by every channel.
    Uniform,
    /// Every segment edge is a variable.
    Segmented,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimiserOptions {
    pub mode: ProfileMode,
    pub lower_dbm: f64,
    pub upper_dbm: f64,
    /// Forward finite-difference step [dB].
    pub fd_step_db: f64,
    /// Stop once max|projected ∇𝓛| falls to this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// L-BFGS history length.
    pub memory: usize,
    /// Largest change of any variable in one line-search trial [dB].
    pub max_step_db: f64,
}

impl Default for OptimiserOptions {
    fn default() -> Self {
        OptimiserOptions {
            mode: ProfileMode::Segmented,
            lower_dbm: -5.0,
            upper_dbm: 5.0,
            fd_step_db: 1e-3,
            grad_tol: 0.01,
            max_iter: 500,
            memory: 10,
            max_step_db: 2.0,
        }
    }
}

impl OptimiserOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.upper_dbm > self.lower_dbm) {
            return Err(invalid("upper power bound must exceed the lower bound"));
        }
        if !(self.fd_step_db > 0.0 && self.grad_tol > 0.0 && self.max_step_db > 0.0) {
            return Err(invalid("finite-difference step, tolerance and step cap must be positive"));
        }
        if self.memory == 0 || self.max_iter == 0 {
            return Err(invalid("memory and iteration cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimisationResult {
    pub profile: SegmentProfile,
    pub report: LinkReport,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    pub max_gradient: f64,
    /// 𝓛 of every accepted iterate, starting with the initial point.
    pub history: Vec<f64>,
    /// True when every evaluated point respected the bounds.
    pub bounds_respected: bool,
}

struct Problem<'a> {
    ctx: &'a LinkContext,
    template: SegmentProfile,
    mode: ProfileMode,
    opts: &'a OptimiserOptions,
    evaluations: usize,
    bounds_respected: bool,
}

impl Problem<'_> {
    fn profile(&self, x: &[f64]) -> Result<SegmentProfile> {
        let mut p = self.template.clone();
        match self.mode {
            ProfileMode::Uniform => p.set_values(&vec![x[0]; p.edge_count()])?,
            ProfileMode::Segmented => p.set_values(x)?,
        }
        Ok(p)
    }

    fn cost(&mut self, x: &[f64]) -> Result<f64> {
        let inside = x.iter().all(|&v| v >= self.opts.lower_dbm && v <= self.opts.upper_dbm);
        self.bounds_respected &= inside;
        self.evaluations += 1;
        let launch = self.profile(x)?.channel_watts(&self.ctx.plan, &self.ctx.grid)?;
        Ok(evaluate(self.ctx, &launch)?.cost)
    }

    /// Forward differences, stepping backwards where the forward point would cross the upper bound.
    fn gradient(&mut self, x: &[f64], f: f64) -> Result<Vec<f64>> {
        let h = self.opts.fd_step_db;
        let mut g = vec![0.0; x.len()];
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            let step = if x[i] + h <= self.opts.upper_dbm { h } else { -h };
            probe[i] = x[i] + step;
            g[i] = (self.cost(&probe)? - f) / step;
            probe[i] = x[i];
        }
        Ok(g)
    }

    fn projected(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(g)
            .map(|(&xi, &gi)| {
                if (xi <= self.opts.lower_dbm && gi > 0.0) || (xi >= self.opts.upper_dbm && gi < 0.0) {
                    0.0
                } else {
                    gi
                }
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Two-loop recursion restricted to the free variables.
fn lbfgs_direction(pg: &[f64], free: &[bool], memory: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> { v.iter().zip(free).map(|(&x, &f)| if f { x } else { 0.0 }).collect() };
    let mut q = mask(pg);
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y) in memory.iter().rev() {
        let (s, y) = (mask(s), mask(y));
        let sy = dot(&s, &y);
        if sy <= 0.0 {
            alphas.push((0.0, s, y, 0.0));
            continue;
        }
        let a = dot(&s, &q) / sy;
        q.iter_mut().zip(&y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push((a, s, y, sy));
    }
    let scale = memory
        .back()
        .map(|(s, y)| {
            let (s, y) = (mask(s), mask(y));
            let (sy, yy) = (dot(&s, &y), dot(&y, &y));
            if sy > 0.0 && yy > 0.0 {
                sy / yy
            } else {
                1.0
            }
        })
        .unwrap_or(1.0);
    q.iter_mut().for_each(|v| *v *= scale);
    for (a, s, y, sy) in alphas.into_iter().rev() {
        if sy <= 0.0 {
            continue;
        }
        let b = dot(&y, &q) / sy;
        q.iter_mut().zip(&s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter().map(|v| -v).collect()
}

/// Bounded limited-memory quasi-Newton descent on the edge powers (dBm) with
/// finite-difference gradients and a projected Armijo backtracking line search.
pub fn optimise(initial: &SegmentProfile, ctx: &LinkContext, opts: &OptimiserOptions) -> Result<OptimisationResult> {
    opts.validate()?;
    if !initial.within(opts.lower_dbm, opts.upper_dbm) {
        return Err(invalid("initial profile lies outside the power bounds"));
    }
    let values = initial.values();
    let mut x = match opts.mode {
        ProfileMode::Uniform => vec![values.iter().sum::<f64>() / values.len() as f64],
        ProfileMode::Segmented => values,
    };
    let mut prob =
        Problem { ctx, template: initial.clone(), mode: opts.mode, opts, evaluations: 0, bounds_respected: true };
    let clamp = |v: f64| v.clamp(opts.lower_dbm, opts.upper_dbm);

    let mut f = prob.cost(&x)?;
    let mut g = prob.gradient(&x, f)?;
    let mut history = vec![f];
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut pg = prob.projected(&x, &g);
    while iterations < opts.max_iter {
        if max_abs(&pg) <= opts.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let free: Vec<bool> = pg.iter().map(|&v| v != 0.0).collect();
        let mut d = lbfgs_direction(&pg, &free, &memory);
        if dot(&d, &pg) >= 0.0 {
            memory.clear();
            d = pg.iter().map(|v| -v).collect();
        }
        let longest = max_abs(&d);
        let mut t = if longest > opts.max_step_db { opts.max_step_db / longest } else { 1.0 };
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| clamp(xi + t * di)).collect();
            let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            if max_abs(&moved) < 1e-12 {
                break;
            }
            let ft = prob.cost(&trial)?;
            if ft <= f + 1e-4 * dot(&g, &moved) {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        let gn = prob.gradient(&xn, fn_)?;
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y));
        }
        x = xn;
        f = fn_;
        g = gn;
        pg = prob.projected(&x, &g);
        history.push(f);
        info!("iteration {iterations}: cost {f:.6}, max |grad| {:.4e}", max_abs(&pg));
    }
    let profile = prob.profile(&x)?;
    let launch = profile.channel_watts(&ctx.plan, &ctx.grid)?;
    let report = report_from(&evaluate(ctx, &launch)?, ctx);
    Ok(OptimisationResult {
        profile,
        report,
        converged,
        iterations,
        evaluations: prob.evaluations,
        max_gradient: max_abs(&pg),
        history,
        bounds_respected: prob.bounds_respected,
    })
}

/// Coarse solve, then a refinement from its result with finer solver settings.
pub fn optimise_two_phase(
    initial: &SegmentProfile,
    coarse: &LinkContext,
    fine: &LinkContext,
    opts: &OptimiserOptions,
) -> Result<(OptimisationResult, OptimisationResult)> {
    let first = optimise(initial, coarse, opts)?;
    let second = optimise(&first.profile, fine, opts)?;
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::band::Band;
    use crate::fibre::FibreSpec;
    use crate::gn::GnSolverConfig;
    use crate::grid::ChannelGrid;
    use crate::link::{BandPlan, NliModel};
    use crate::units::wavelength_to_freq;

    fn ctx() -> LinkContext {
        let grid = ChannelGrid::uniform(12, 100e9, 96e9, wavelength_to_freq(1550e-9)).unwrap().with_band(Band::C);
        let fibre = FibreSpec::standard(80e3);
        let plan = BandPlan::from_grid(&grid, 5.0).unwrap();
        let solver = GnSolverConfig::new(&fibre, 40, 1.0).unwrap();
        let mut c = LinkContext::new(grid, fibre, plan, solver);
        c.model = NliModel::Cfm;
        c
    }

    #[test]
    fn uniform_mode_reaches_stationarity() {
        let c = ctx();
        let init = SegmentProfile::uniform(&c.plan, &c.grid, 0.0);
        let r = optimise(&init, &c, &OptimiserOptions { mode: ProfileMode::Uniform, ..Default::default() }).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.max_gradient <= 0.01);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.bounds_respected && r.profile.within(-5.0, 5.0));
        let v = r.profile.values();
        assert!(v.iter().all(|&p| p == v[0]));
    }

    #[test]
    fn bounds_are_active_when_optimum_is_outside() {
        let c = ctx();
        let init = SegmentProfile::uniform(&c.plan, &c.grid, 0.0);
        let opts = OptimiserOptions { mode: ProfileMode::Segmented, lower_dbm: -3.0, upper_dbm: -2.0, ..Default::default() };
        let r = optimise(&init.clone_with(-2.5), &c, &opts).unwrap();
        assert!(r.converged);
        assert!(r.profile.values().iter().all(|&p| p == -2.0));
        assert!(r.bounds_respected);
        assert!(optimise(&init, &c, &opts).is_err());
    }

    impl SegmentProfile {
        fn clone_with(&self, dbm: f64) -> Self {
            let mut p = self.clone();
            p.set_values(&vec![dbm; p.edge_count()]).unwrap();
            p
        }
    }
}
