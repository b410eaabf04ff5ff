//! Configuration, experiment drivers and report emission for `nlheat`.
//!
//! Configurations are TOML documents mirroring [`ExperimentConfig`]; see the
//! README for the full grammar. Reports are written as
//! `<command>_<run id>.csv` and `.json`, where the run id is derived from the
//! canonical configuration, so identical inputs give identical files.

pub mod check;
pub mod config;
pub mod run;

pub use check::{run_check, CheckReport, PropertyResult};
pub use config::{
    emit_config, parse_config, parse_config_as, CheckOptions, Command, ConfigError,
    ConsistencyOptions, ExperimentConfig, SolveOptions, UniquenessOptions,
};
pub use run::{
    emit_reports, ensure_output_dir, property_status, run_command, Results, RunError, RunOutput,
};
