//! Nonlinear-interference modelling for ultrawideband WDM links: fibre profiles,
//! Raman power evolution, the GN integral in hyperbolic coordinates, a closed-form
//! comparator, a split-step reference simulator and launch-power optimisation.

pub mod band;
pub mod cfm;
pub mod cli;
pub mod config;
pub mod error;
pub mod fibre;
pub mod gn;
pub mod grid;
pub mod io;
pub mod link;
pub mod ode;
pub mod raman;
pub mod ssfm;
pub mod table;
pub mod units;

pub use error::{Error, Result};
