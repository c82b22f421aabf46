//! Experiment orchestration: plans, simulation, training, benchmarking and
//! ranking.

pub mod bench;
pub mod compare;
pub mod ops;
pub mod plan;

pub use bench::{marginal_toeplitz, run_bench, run_trial, trial_input, BenchContext, BenchReport, DenoiseModel, SummaryRow};
pub use compare::{run_compare, CompareReport, RankedMethod, SnrRanking};
pub use ops::{held_out_residual_variance, run_simulate, run_train, SimulateOutput, TrainReport};
pub use plan::{DenoiseMode, ExperimentPlan, Method, SolverSettings};
