//! GN integral for the NLI PSD, evaluated per channel as a Riemann sum over four
//! quadrants in hyperbolic coordinates with a step-wise constant power profile.

mod phase;
mod quadrant;
mod solver;

pub use phase::phase_mismatch;
pub use quadrant::{quadrant_limits, QuadrantDomain};
pub use solver::{
    all_channels_nli, channel_nli, channels_nli, ChannelIntegral, ChannelNli, GnSolverConfig, NliResult,
    Upsilon1Sampling, Upsilon2Sampling, DEFAULT_GRADED_FLOOR,
};
