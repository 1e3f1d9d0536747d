//! Workload files: a `cutsched-workload` header, then one job per line with
//! the circuit fields flattened into the record.

use std::collections::BTreeMap;
use std::path::Path;

use cutsched_core::workload::{Circuit, Job, Stage};
use serde::{Deserialize, Serialize};

use crate::error::{bare_message, CliError, Result};
use crate::files::{parse_jsonl, read_text, to_jsonl, write_atomic, Header};

pub const WORKLOAD_FORMAT: &str = "cutsched-workload";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobRecord {
    id: String,
    num_qubits: u32,
    depth: u32,
    one_q_gates: u64,
    coupling: Vec<[u32; 3]>,
    shots: u64,
    arrival_time: f64,
    parent_id: Option<String>,
    stage: Stage,
    cut_index: Option<u32>,
    n_cut: u32,
}

impl From<&Job> for JobRecord {
    fn from(j: &Job) -> Self {
        JobRecord {
            id: j.id.clone(),
            num_qubits: j.circuit.num_qubits,
            depth: j.circuit.depth,
            one_q_gates: j.circuit.one_q_gates,
            coupling: j.circuit.coupling.iter().map(|&(a, b, w)| [a, b, w]).collect(),
            shots: j.shots,
            arrival_time: j.arrival_time,
            parent_id: j.parent_id.clone(),
            stage: j.stage,
            cut_index: j.cut_index,
            n_cut: j.n_cut,
        }
    }
}

impl JobRecord {
    fn into_job(self) -> cutsched_core::Result<Job> {
        let raw = Circuit {
            id: self.id.clone(),
            num_qubits: self.num_qubits,
            depth: self.depth,
            coupling: self.coupling.iter().map(|&[a, b, w]| (a, b, w)).collect(),
            one_q_gates: self.one_q_gates,
        };
        // strict check first, so zero weights and repeated pairs are
        // reported rather than silently merged
        raw.validate().map_err(|e| prefix(&self.id, e))?;
        let circuit = Circuit::new(raw.id, raw.num_qubits, raw.depth, raw.coupling, raw.one_q_gates)?;
        let job = Job {
            id: self.id,
            circuit,
            shots: self.shots,
            arrival_time: self.arrival_time,
            parent_id: self.parent_id,
            stage: self.stage,
            cut_index: self.cut_index,
            n_cut: self.n_cut,
        };
        job.validate()?;
        Ok(job)
    }
}

fn prefix(id: &str, e: cutsched_core::Error) -> cutsched_core::Error {
    match e {
        cutsched_core::Error::Validation(msg) => cutsched_core::Error::Validation(format!("job {id}: {msg}")),
        other => other,
    }
}

pub fn workload_to_string(jobs: &[Job]) -> String {
    to_jsonl(&Header::new(WORKLOAD_FORMAT), jobs.iter().map(JobRecord::from))
}

/// Parses workload text; errors name the line and the offending field.
pub fn parse_workload(path: &Path, text: &str) -> Result<Vec<Job>> {
    let (_, records) = parse_jsonl::<JobRecord>(path, text, WORKLOAD_FORMAT)?;
    let mut first_line: BTreeMap<String, usize> = BTreeMap::new();
    let mut jobs = Vec::with_capacity(records.len());
    for (line, record) in records {
        let parse_err = |msg: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let job = record.into_job().map_err(|e| parse_err(bare_message(&e)))?;
        if let Some(prev) = first_line.insert(job.id.clone(), line) {
            return Err(parse_err(format!("duplicate job id {} (first on line {prev})", job.id)));
        }
        jobs.push(job);
    }
    Ok(jobs)
}

pub fn load_workload(path: &Path) -> Result<Vec<Job>> {
    parse_workload(path, &read_text(path)?)
}

pub fn save_workload(path: &Path, jobs: &[Job]) -> Result<()> {
    write_atomic(path, workload_to_string(jobs).as_bytes())
}
