//! Config-driven runner for the escape-core experiments.
//!
//! A scenario file is read into an [`ExperimentConfig`], [`run_experiment`]
//! executes the pipeline and [`emit_report`] writes the CSVs, the JSON summary
//! and the table.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod pipeline;
pub mod report;
pub mod summary;

pub use config::{ConfigError, ExperimentConfig, OUTPUT_ENV};
pub use pipeline::{run_experiment, STAGES};
pub use report::{emit_report, table};
pub use summary::{Check, RunSummary, Timings};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ACCEPTANCE_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const RUNTIME_ERROR: i32 = 3;
}

/// Directory holding the shipped scenarios.
pub fn scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}
