//! Simulation traces as JSON lines: a `cutsched-trace` header naming the
//! mode, then one event per line. A trace is self-contained, so replaying
//! it recomputes the run's metrics exactly.

use std::path::Path;

use cutsched_core::cutplan::CutMode;
use cutsched_core::sim::{metrics_from_trace, Metrics, Trace, TraceEvent};

use crate::error::{CliError, Result};
use crate::files::{parse_jsonl, read_text, to_jsonl, Header};

pub const TRACE_FORMAT: &str = "cutsched-trace";

pub fn trace_to_string(mode: CutMode, trace: &Trace) -> String {
    let header = Header {
        mode: Some(mode),
        ..Header::new(TRACE_FORMAT)
    };
    to_jsonl(&header, &trace.events)
}

pub fn parse_trace(path: &Path, text: &str) -> Result<(CutMode, Trace)> {
    let (header, events) = parse_jsonl::<TraceEvent>(path, text, TRACE_FORMAT)?;
    let mode = header.mode.ok_or_else(|| CliError::Parse {
        path: path.to_path_buf(),
        line: 1,
        msg: "trace header lacks a mode".into(),
    })?;
    Ok((
        mode,
        Trace {
            events: events.into_iter().map(|(_, e)| e).collect(),
        },
    ))
}

pub fn load_trace(path: &Path) -> Result<(CutMode, Trace)> {
    parse_trace(path, &read_text(path)?)
}

/// Metrics recomputed from a trace file's events.
pub fn replay(trace: &Trace) -> Metrics {
    metrics_from_trace(trace)
}
