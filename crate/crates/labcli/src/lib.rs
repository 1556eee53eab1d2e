//! Configuration, seeded runs and persistence for the `rfimlab` command.

pub mod config;
pub mod run;
pub mod verify;

pub use config::{apply_override, ConfigError, ExperimentConfig, ExperimentKind};
pub use run::{load_records, load_summary, run_experiment, run_replicate, summarize, Record, RunError, Summary};
