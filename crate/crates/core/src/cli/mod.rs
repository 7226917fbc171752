//! Batch experiment runner: TOML configs, grid sweeps, JSON-lines and CSV
//! reports.

mod config;
mod runner;

pub use config::{ExperimentConfig, ExperimentKind, Grid, Output, Tolerances};
pub use runner::{
    builtin_system, expand, fock_crossed_report, fock_cuntz_report, run, write_reports, Point, Record,
    SCHEMA_VERSION,
};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "LPFOCK_OUT_DIR";
