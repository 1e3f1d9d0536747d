//! The LO/LOCC comparison table: CSV with the columns
//! `Mode, Length, T_wait, T_run, T_total, LPST, WorkloadChanges`, a JSON
//! rendering with every metric, and an aligned text rendering for the
//! terminal.
//!
//! Floats are written in Rust's shortest round-trip form, so parsing a CSV
//! row gives back the in-memory values bit for bit.

use std::fmt::Write as _;

use cutsched_core::cutplan::CutMode;
use cutsched_core::sim::Metrics;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CSV_COLUMNS: [&str; 7] = [
    "Mode",
    "Length",
    "T_wait",
    "T_run",
    "T_total",
    "LPST",
    "WorkloadChanges",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub mode: CutMode,
    pub metrics: Metrics,
}

/// The table columns of a row, as they appear in the CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub mode: CutMode,
    pub length: f64,
    pub t_wait: f64,
    pub t_run: f64,
    pub t_total: f64,
    pub lpst: f64,
    pub workload_changes: u64,
}

impl From<&MetricsRow> for TableRow {
    fn from(r: &MetricsRow) -> Self {
        let m = &r.metrics;
        TableRow {
            mode: r.mode,
            length: m.avg_queue_length,
            t_wait: m.t_wait,
            t_run: m.t_run,
            t_total: m.t_total,
            lpst: m.mean_lpst,
            workload_changes: m.workload_changes,
        }
    }
}

pub fn to_csv(rows: &[MetricsRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in rows {
        let t = TableRow::from(r);
        w.write_record([
            t.mode.as_str().to_string(),
            t.length.to_string(),
            t.t_wait.to_string(),
            t.t_run.to_string(),
            t.t_total.to_string(),
            t.lpst.to_string(),
            t.workload_changes.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn parse_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| CliError::Invalid(format!("metrics csv: {e}")))?;
    if headers.iter().ne(CSV_COLUMNS) {
        return Err(CliError::Invalid(format!(
            "metrics csv: unexpected columns {headers:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Invalid(format!("metrics csv row {}: {e}", i + 1)))?;
        let bad = |col: &str| CliError::Invalid(format!("metrics csv row {}: bad {col}", i + 1));
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad(CSV_COLUMNS[k]));
        let mode = match &rec[0] {
            "LO" => CutMode::Lo,
            "LOCC" => CutMode::Locc,
            _ => return Err(bad("Mode")),
        };
        rows.push(TableRow {
            mode,
            length: num(1)?,
            t_wait: num(2)?,
            t_run: num(3)?,
            t_total: num(4)?,
            lpst: num(5)?,
            workload_changes: rec[6].parse().map_err(|_| bad("WorkloadChanges"))?,
        });
    }
    Ok(rows)
}

pub fn to_json(rows: &[MetricsRow]) -> String {
    let mut s = serde_json::to_string_pretty(rows).expect("metrics serialise");
    s.push('\n');
    s
}

/// Fixed-width table for the terminal.
pub fn to_text(rows: &[MetricsRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>16}",
        CSV_COLUMNS[0], CSV_COLUMNS[1], CSV_COLUMNS[2], CSV_COLUMNS[3], CSV_COLUMNS[4], CSV_COLUMNS[5], CSV_COLUMNS[6]
    );
    for r in rows {
        let t = TableRow::from(r);
        let _ = writeln!(
            out,
            "{:<6} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>10.2} {:>16}",
            t.mode.as_str(),
            t.length,
            t.t_wait,
            t.t_run,
            t.t_total,
            t.lpst,
            t.workload_changes
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(mode: CutMode, x: f64) -> MetricsRow {
        MetricsRow {
            mode,
            metrics: Metrics {
                avg_queue_length: x,
                t_wait: x / 3.0,
                t_run: 0.1 + x,
                t_total: x / 3.0 + 0.1 + x,
                mean_lpst: -x / 7.0,
                workload_changes: 17,
                ..Metrics::default()
            },
        }
    }

    #[test]
    fn header_is_exact() {
        let csv = to_csv(&[]);
        assert_eq!(csv, "Mode,Length,T_wait,T_run,T_total,LPST,WorkloadChanges\n");
    }

    #[test]
    fn negative_infinity_survives() {
        let mut r = row(CutMode::Lo, 1.0);
        r.metrics.mean_lpst = f64::NEG_INFINITY;
        assert_eq!(parse_csv(&to_csv(&[r])).unwrap()[0].lpst, f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn csv_rows_parse_back_bit_identical(x in 0.0f64..1e6, locc in any::<bool>()) {
            let rows = [row(if locc { CutMode::Locc } else { CutMode::Lo }, x)];
            let back = parse_csv(&to_csv(&rows)).unwrap();
            let want = TableRow::from(&rows[0]);
            prop_assert_eq!(back.len(), 1);
            for (a, b) in [
                (back[0].length, want.length),
                (back[0].t_wait, want.t_wait),
                (back[0].t_run, want.t_run),
                (back[0].t_total, want.t_total),
                (back[0].lpst, want.lpst),
            ] {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back[0].mode, want.mode);
            prop_assert_eq!(back[0].workload_changes, 17);
        }
    }
}
