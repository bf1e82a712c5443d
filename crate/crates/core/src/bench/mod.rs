//! Benchmark functions, the paired experiment runner and its statistics.

pub mod experiment;
pub mod functions;
pub mod stats;

pub use experiment::{run_experiment, run_experiment_in, ExperimentConfig, TrialRecord};
pub use functions::{evaluate_function, BenchmarkFunction, FunctionId};
pub use stats::{format_table, geometric_mean, summarize, wilcoxon_signed_rank, ComparisonSummary};
