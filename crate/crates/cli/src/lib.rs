//! File formats, reports and run drivers for `cutsched-core`.
//!
//! Everything that touches the file system or the terminal lives here:
//! versioned JSON-lines files for workloads, fleets and traces, the schedule
//! report, the metrics table (CSV, JSON, text), Gantt SVGs, and the drivers
//! behind the `cutsched` command. Output files are written atomically.

pub mod error;
pub mod files;
pub mod fleet_file;
pub mod gantt;
pub mod metrics_table;
pub mod report;
pub mod run;
pub mod trace_file;
pub mod workload_file;

pub use error::{CliError, Result};
