//! The before/after feature-selection grid, the optimizer benchmark and
//! exploratory summaries.

mod bench;
mod config;
mod describe;
mod report;
mod runner;

pub use bench::{bench, median, BenchRun, BenchSummary};
pub use config::{DatasetSpec, ExperimentConfig, CONFIG_SCHEMA_VERSION};
pub use describe::{describe, ColumnStats, Description};
pub use report::{
    read_report, write_atomic, CellError, CellTiming, DatasetSummary, ExperimentReport, ReportBody, RunRecord,
    REPORT_FILE, TABLE_FILE,
};
pub use runner::{load_balanced, run_cell, run_experiment, scaled_split};
