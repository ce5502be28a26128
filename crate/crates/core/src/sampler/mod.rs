//! Monte Carlo estimation beyond the exhaustive range.

mod chain;
mod estimate;
mod probes;

pub use chain::{metropolis_chain, parallel_tempering, ChainConfig, ChainRun, ChainTrace};
pub use estimate::{
    beta_grid, estimate_free_energy, estimate_max, free_energy_ti, mean_energy,
    replica_overlap_stats, tau_int, Effort, EstimateWithError, FreeEnergyEstimate, MaxEstimate,
    ReplicaStats, MAX_LADDER, MIN_CHAINS,
};
pub use probes::{
    chaos_probe, concentration_probe, monotonicity_probe, ChaosReport, ConcentrationReport,
    MaxSolver, MonotonicityReport, MonotonicityRow, TailRow, AUTO_EXACT_LIMIT,
};
