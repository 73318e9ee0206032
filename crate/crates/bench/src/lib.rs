//! Fixtures shared by the benchmarks.

use dfrelay::{sample_realization, ChannelRealization, RicianConfig, SolverConfig};

/// Relay-midway Rician instance with `m` subcarriers.
pub fn instance(m: usize, seed: u64) -> ChannelRealization {
    sample_realization(&RicianConfig::new(3.0, 1.0, 3.0, m), seed).expect("valid config")
}

/// A run of exactly `iters` plain dual iterations: the trigger never fires
/// and the pairing is amended once at the end.
pub fn fixed_iterations(iters: usize) -> SolverConfig {
    SolverConfig {
        eps_converge: 0.0,
        extra_iter_frac: 0.0,
        max_iter_hard: iters,
        ..SolverConfig::default()
    }
}
