//! Link budget, Shannon throughput and launch-power optimisation.

mod cost;
mod optimise;
mod profile;

pub use cost::{evaluate, report, BandReport, ChannelReport, Evaluation, LinkContext, LinkReport, NliModel};
pub use optimise::{optimise, optimise_two_phase, OptimisationResult, OptimiserOptions, ProfileMode};
pub use profile::{BandPlan, BandSegments, PlanBand, SegmentProfile};

use crate::error::{invalid, Result};
use crate::units::PLANCK;

/// Dual-polarisation ASE power in `b_ch` of one amplifier with gain `gain` [W]:
/// 2·n_sp·h·f·(G − 1)·B_ch with n_sp = 10^{NF/10}/2.
pub fn ase_power(noise_figure_db: f64, gain: f64, f: f64, b_ch: f64) -> Result<f64> {
    if !(gain >= 1.0) {
        return Err(invalid(format!("amplifier gain {gain} is below unity")));
    }
    let n_sp = 10f64.powf(noise_figure_db / 10.0) / 2.0;
    Ok(2.0 * n_sp * PLANCK * f * (gain - 1.0) * b_ch)
}
