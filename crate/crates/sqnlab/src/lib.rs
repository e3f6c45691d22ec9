//! Benchmark harness for the `sqn` solvers.
//!
//! An [`ExperimentSpec`] names a synthetic problem, a list of algorithm
//! configurations, and a repetition count; [`run_experiment`] executes every
//! (algorithm, repetition) pair on a worker pool with per-run seeds derived
//! from the master seed, then aggregates per-run records into summary
//! statistics and writes CSV/JSON outputs.
//!
//! Two presets reproduce the library's standard comparisons at desk scale:
//! [`presets::table1_preset`] races SGD, the shifted-BFGS baseline, damped
//! BFGS, and cyclic BB on the perturbed quadratic with distance-based
//! termination, and [`presets::svm_preset`] compares the randomized-stopping
//! variants on the sigmoid SVM under a fixed oracle-call budget.

pub mod error;
pub mod experiment;
pub mod io;
pub mod presets;
pub mod report;
pub mod seed;
pub mod stats;

pub use error::HarnessError;
pub use experiment::{
    run_experiment, AlgorithmSpec, ExperimentOutput, ExperimentSpec, ProblemConfig, RandomizedSpec,
    RunRecord,
};
pub use io::{emit_csv, emit_json, load_json, JsonReport};
pub use report::{bb_fraction_report, BbFractionCell};
pub use stats::{AggregateStats, AlgoStats};
