//! Signal power evolution along the fibre under attenuation and inter-channel
//! stimulated Raman scattering.

mod evolution;
mod grid;

pub(crate) use evolution::coupling_matrix;
pub use evolution::{p_k_factor, solve_power_evolution, solve_power_evolution_with, PowerEvolution};
pub use grid::{build_distance_grid, build_distance_grid_with, DistanceGrid, LogScale};
