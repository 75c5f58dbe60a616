//! File formats, experiment configs and the Monte Carlo runner.

pub mod config;
pub mod experiment;
pub mod io;

pub use config::{ExperimentConfig, FamilySpec, Mode};
pub use experiment::{run_experiment, simulate_trials, ExperimentOutput, RunRecord, TrialRecord};
