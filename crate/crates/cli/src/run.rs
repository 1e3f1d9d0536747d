//! Command drivers shared by the binary and the tests: build the scheduler
//! configuration from overrides, run one or both modes on the same inputs,
//! and render every output file in memory before anything is written.

use std::path::{Path, PathBuf};

use cutsched_core::cutplan::CutMode;
use cutsched_core::fleet::Fleet;
use cutsched_core::scheduler::{qumod_schedule_in, PlanContext, ScheduleOutcome, SchedulerConfig};
use cutsched_core::sim::{simulate, SimOutcome, Trace};
use cutsched_core::workload::{gen_workload, Job, WorkloadClass, WorkloadSpec};

use crate::error::{CliError, Result};
use crate::files::write_atomic;
use crate::gantt::{bars_from_schedule, bars_from_trace, render_svg};
use crate::metrics_table::{self, MetricsRow};
use crate::report::ScheduleReport;
use crate::trace_file::{replay, trace_to_string};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeSel {
    Lo,
    Locc,
    Both,
}

impl ModeSel {
    pub fn modes(self) -> Vec<CutMode> {
        match self {
            ModeSel::Lo => vec![CutMode::Lo],
            ModeSel::Locc => vec![CutMode::Locc],
            ModeSel::Both => vec![CutMode::Lo, CutMode::Locc],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ClassSel {
    Small,
    Large,
    Random,
}

impl From<ClassSel> for WorkloadClass {
    fn from(c: ClassSel) -> Self {
        match c {
            ClassSel::Small => WorkloadClass::Small,
            ClassSel::Large => WorkloadClass::LargeMandatory,
            ClassSel::Random => WorkloadClass::RandomHeterogeneous,
        }
    }
}

/// Job count used when a class is generated without `--count`.
pub fn default_count(class: WorkloadClass) -> usize {
    match class {
        WorkloadClass::Small => 50,
        WorkloadClass::LargeMandatory => 50,
        WorkloadClass::RandomHeterogeneous => 158,
    }
}

pub fn generate(class: WorkloadClass, count: usize, seed: u64) -> Result<Vec<Job>> {
    Ok(gen_workload(&WorkloadSpec::for_class(class, count, seed))?)
}

/// Scheduler parameters set on the command line; `None` keeps the default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub window: Option<usize>,
    pub theta: Option<f64>,
    pub budget: Option<u64>,
    pub lambda: Option<f64>,
    pub lambda_fidelity: Option<f64>,
    pub cmax: Option<usize>,
}

impl Overrides {
    pub fn config(&self, mode: CutMode) -> Result<SchedulerConfig> {
        let mut c = SchedulerConfig::new(mode);
        if let Some(v) = self.window {
            c.window = v;
        }
        if let Some(v) = self.theta {
            c.budget.adaptive_threshold = v;
        }
        if let Some(v) = self.budget {
            c.budget.max_overhead = v;
        }
        if let Some(v) = self.lambda {
            c.grouping.lambda = v;
        }
        if let Some(v) = self.lambda_fidelity {
            c.lambda_fidelity = v;
        }
        if let Some(v) = self.cmax {
            c.grouping.c_max = v;
        }
        c.validate()
            .map_err(|e| CliError::Invalid(format!("invalid override: {}", crate::error::bare_message(&e))))?;
        Ok(c)
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleRun {
    pub mode: CutMode,
    pub outcome: ScheduleOutcome,
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub mode: CutMode,
    pub outcome: SimOutcome,
}

/// Plans `jobs` once per mode, from time zero.
pub fn run_schedule(jobs: &[Job], fleet: &Fleet, overrides: &Overrides, modes: &[CutMode]) -> Result<Vec<ScheduleRun>> {
    cutsched_core::workload::validate_jobs(jobs)?;
    modes
        .iter()
        .map(|&mode| {
            let config = overrides.config(mode)?;
            let outcome = qumod_schedule_in(jobs, fleet, &config, &PlanContext::default())?;
            Ok(ScheduleRun { mode, outcome })
        })
        .collect()
}

/// Simulates `jobs` once per mode; every mode sees the same workload.
pub fn run_simulate(jobs: &[Job], fleet: &Fleet, overrides: &Overrides, modes: &[CutMode]) -> Result<Vec<SimRun>> {
    modes
        .iter()
        .map(|&mode| {
            let config = overrides.config(mode)?;
            Ok(SimRun {
                mode,
                outcome: simulate(jobs, fleet, &config)?,
            })
        })
        .collect()
}

/// An output file rendered in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, text: String) -> Artifact {
        Artifact {
            name: name.into(),
            bytes: text.into_bytes(),
        }
    }
}

fn lanes(fleet: &Fleet) -> Vec<String> {
    fleet.sorted_devices().iter().map(|d| d.name.clone()).collect()
}

fn tag(mode: CutMode) -> String {
    mode.as_str().to_ascii_lowercase()
}

/// `schedule-<mode>.json` and `gantt-<mode>.svg` per run.
pub fn schedule_artifacts(runs: &[ScheduleRun], fleet: &Fleet) -> Vec<Artifact> {
    let mut out = Vec::new();
    for r in runs {
        let report = ScheduleReport::new(r.mode, &r.outcome);
        out.push(Artifact::new(
            format!("schedule-{}.json", tag(r.mode)),
            report.to_json(),
        ));
        let title = format!(
            "{} schedule, makespan {:.3} s",
            r.mode.as_str(),
            r.outcome.schedule.makespan
        );
        let svg = render_svg(&title, &lanes(fleet), &bars_from_schedule(&r.outcome.schedule));
        out.push(Artifact::new(format!("gantt-{}.svg", tag(r.mode)), svg));
    }
    out
}

pub fn metrics_rows(runs: &[SimRun]) -> Vec<MetricsRow> {
    runs.iter()
        .map(|r| MetricsRow {
            mode: r.mode,
            metrics: r.outcome.metrics,
        })
        .collect()
}

fn table_artifacts(rows: &[MetricsRow]) -> [Artifact; 2] {
    [
        Artifact::new("metrics.csv", metrics_table::to_csv(rows)),
        Artifact::new("metrics.json", metrics_table::to_json(rows)),
    ]
}

/// Metrics table plus `trace-<mode>.jsonl` and an executed-schedule Gantt
/// per run.
pub fn simulate_artifacts(runs: &[SimRun], fleet: &Fleet) -> Vec<Artifact> {
    let mut out: Vec<Artifact> = table_artifacts(&metrics_rows(runs)).into();
    for r in runs {
        out.push(Artifact::new(
            format!("trace-{}.jsonl", tag(r.mode)),
            trace_to_string(r.mode, &r.outcome.trace),
        ));
        let title = format!(
            "{} executed, makespan {:.3} s",
            r.mode.as_str(),
            r.outcome.metrics.makespan
        );
        let svg = render_svg(&title, &lanes(fleet), &bars_from_trace(&r.outcome.trace));
        out.push(Artifact::new(format!("gantt-{}.svg", tag(r.mode)), svg));
    }
    out
}

/// Replays traces into a metrics table and Gantt charts.
pub fn report_artifacts(traces: &[(CutMode, Trace)], fleet: &Fleet) -> (Vec<MetricsRow>, Vec<Artifact>) {
    let rows: Vec<MetricsRow> = traces
        .iter()
        .map(|(mode, t)| MetricsRow {
            mode: *mode,
            metrics: replay(t),
        })
        .collect();
    let mut out: Vec<Artifact> = table_artifacts(&rows).into();
    for (mode, t) in traces {
        let title = format!("{} executed", mode.as_str());
        out.push(Artifact::new(
            format!("gantt-{}.svg", tag(*mode)),
            render_svg(&title, &lanes(fleet), &bars_from_trace(t)),
        ));
    }
    (rows, out)
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            write_atomic(&path, &a.bytes)?;
            Ok(path)
        })
        .collect()
}
