//! Config-driven Monte-Carlo simulation.

pub mod config;
pub mod runner;
pub mod stats;

pub use config::ExperimentConfig;
pub use runner::{
    run_experiment, run_experiment_with, PointSetup, RunOptions, Scenario, SimResult, CSV_HEADER, THREADS_ENV,
};
pub use stats::clopper_pearson;
