//! Resource allocation for OFDM two-hop decode-and-forward relaying:
//! joint subcarrier pairing, mode selection and power allocation.

pub mod baselines;
pub mod channel;
pub mod dual;
pub mod dual_bound;
pub mod error;
pub mod experiments;
pub mod fixed;
pub mod instance;
pub mod oracle;
pub mod problem;
pub mod rate;
pub mod solver_extra;
pub mod solver_individual;
pub mod solver_total;
pub mod validate;
pub mod waterfill;

pub use baselines::{evaluate_baseline, scp_pairing, BaselineKind};
pub use channel::{sample_realization, ChannelRealization, PairGain, PairMode, RicianConfig, WeightRule};
pub use dual::{SolveReport, SolverConfig, TraceRow};
pub use error::{Error, Result};
pub use experiments::{solve, Scenario, Scheme};
pub use instance::{load_instance, read_instance, save_instance, write_instance};
pub use oracle::OracleResult;
pub use problem::{IndividualBudgets, PowerConstraint};
pub use rate::{weighted_sum_rate, Allocation, PairingMatrix};
pub use solver_extra::{solve_extra_individual, solve_extra_total};
pub use solver_individual::{solve_individual, zero_crossing_refine};
pub use solver_total::solve_total;
pub use validate::validate_allocation;
pub use waterfill::{waterfill, WaterfillProblem, WaterfillSolution};
