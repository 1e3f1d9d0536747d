//! Co-execution grouping under capacity, cardinality and causal constraints.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::workload::{Job, Stage};
use crate::{Error, Result, Seconds};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupingParams {
    /// Qubit capacity a group may fill.
    pub q_dev: u32,
    /// Maximum jobs per group.
    pub c_max: usize,
    /// Weight of the causal-span term in [`group_cost`].
    pub lambda: f64,
}

impl Default for GroupingParams {
    fn default() -> Self {
        GroupingParams {
            q_dev: 127,
            c_max: 8,
            lambda: 1.0,
        }
    }
}

impl GroupingParams {
    pub fn validate(&self) -> Result<()> {
        if self.c_max == 0 {
            return Err(Error::Validation("cmax must be at least 1".into()));
        }
        if self.q_dev == 0 {
            return Err(Error::Validation("Q_dev must be positive".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Validation("lambda must be a finite non-negative number".into()));
        }
        Ok(())
    }
}

/// Jobs that run side by side on one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub members: Vec<Job>,
    pub qubit_demand: u32,
    /// Longest member runtime on the assigned device; 0 until assigned.
    pub runtime_bound: Seconds,
}

impl Group {
    pub fn new(members: Vec<Job>) -> Group {
        let qubit_demand = members.iter().map(Job::width).sum();
        Group {
            members,
            qubit_demand,
            runtime_bound: 0.0,
        }
    }

    /// Stages present per cut parent.
    pub fn stage_signature(&self) -> BTreeMap<&str, BTreeSet<Stage>> {
        let mut sig: BTreeMap<&str, BTreeSet<Stage>> = BTreeMap::new();
        for m in &self.members {
            if let Some(p) = &m.parent_id {
                sig.entry(p.as_str()).or_default().insert(m.stage);
            }
        }
        sig
    }

    /// True when some parent has both Upstream and Downstream members.
    pub fn mixes_causal_stages(&self) -> bool {
        self.stage_signature()
            .values()
            .any(|s| s.contains(&Stage::Upstream) && s.contains(&Stage::Downstream))
    }
}

/// Causal stage index used by the span term: 1 for Downstream, else 0.
pub fn causal_index(job: &Job) -> u32 {
    match job.stage {
        Stage::Downstream => 1,
        Stage::Flat | Stage::Upstream => 0,
    }
}

fn conflicts(a: &Job, b: &Job) -> bool {
    match (&a.parent_id, &b.parent_id) {
        (Some(pa), Some(pb)) => pa == pb && a.stage != b.stage,
        _ => false,
    }
}

/// Cost of co-executing `group`, with `runtimes[i]` the runtime of
/// `group[i]`: `+inf` for an infeasible group, otherwise
/// `max T / min T - 1 + lambda * (max C - min C)`.
pub fn group_cost(group: &[&Job], runtimes: &[Seconds], params: &GroupingParams) -> Result<f64> {
    if group.is_empty() {
        return Err(Error::Validation("group must be non-empty".into()));
    }
    if group.len() != runtimes.len() {
        return Err(Error::Validation("one runtime per group member is required".into()));
    }
    if let Some(pos) = runtimes.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::Domain(format!(
            "runtime of {} must be strictly positive",
            group[pos].id
        )));
    }
    let demand: u64 = group.iter().map(|j| u64::from(j.width())).sum();
    if group.len() > params.c_max || demand > u64::from(params.q_dev) {
        return Ok(f64::INFINITY);
    }
    for (i, a) in group.iter().enumerate() {
        if group[i + 1..].iter().any(|b| conflicts(a, b)) {
            return Ok(f64::INFINITY);
        }
    }
    let t_max = runtimes.iter().copied().fold(f64::MIN, f64::max);
    let t_min = runtimes.iter().copied().fold(f64::MAX, f64::min);
    let c_max = group.iter().map(|j| causal_index(j)).max().unwrap_or(0);
    let c_min = group.iter().map(|j| causal_index(j)).min().unwrap_or(0);
    Ok(t_max / t_min - 1.0 + params.lambda * f64::from(c_max - c_min))
}

/// Descending runtime, ties by ascending job id.
pub(crate) fn runtime_order(jobs: &[Job], runtimes: &[Seconds]) -> Vec<usize> {
    sort_by_runtime(jobs, runtimes, (0..jobs.len()).collect())
}

pub(crate) fn sort_by_runtime(jobs: &[Job], runtimes: &[Seconds], mut order: Vec<usize>) -> Vec<usize> {
    order.sort_by(|&a, &b| {
        runtimes[b]
            .partial_cmp(&runtimes[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| jobs[a].id.cmp(&jobs[b].id))
    });
    order
}

/// Greedy grouping over job indices; groups in creation order.
pub(crate) fn partition_indices(
    jobs: &[Job],
    runtimes: &[Seconds],
    params: &GroupingParams,
) -> Result<Vec<Vec<usize>>> {
    params.validate()?;
    if jobs.len() != runtimes.len() {
        return Err(Error::Validation("one runtime per job is required".into()));
    }
    if let Some(j) = jobs.iter().find(|j| j.width() > params.q_dev) {
        return Err(Error::Validation(format!(
            "job {} needs {} qubits but groups hold at most {}",
            j.id,
            j.width(),
            params.q_dev
        )));
    }
    partition_subset(jobs, runtime_order(jobs, runtimes), params)
}

/// Greedy grouping of the jobs listed in `order`, which must already be in
/// descending-runtime order.
pub(crate) fn partition_subset(jobs: &[Job], order: Vec<usize>, params: &GroupingParams) -> Result<Vec<Vec<usize>>> {
    let mut remaining = order;
    let mut groups = Vec::new();
    while !remaining.is_empty() {
        let mut group: Vec<usize> = Vec::new();
        let mut used = 0u32;
        // parent -> stage present in the open group
        let mut stages: BTreeMap<&str, Stage> = BTreeMap::new();
        let mut rest = Vec::with_capacity(remaining.len());
        for &j in &remaining {
            let job = &jobs[j];
            let admit = group.len() < params.c_max
                && used + job.width() <= params.q_dev
                && job
                    .parent_id
                    .as_deref()
                    .and_then(|p| stages.get(p))
                    .is_none_or(|&s| s == job.stage);
            if admit {
                group.push(j);
                used += job.width();
                if let Some(p) = job.parent_id.as_deref() {
                    stages.insert(p, job.stage);
                }
            } else {
                rest.push(j);
            }
        }
        groups.push(group);
        remaining = rest;
    }
    Ok(groups)
}

/// Greedy packing: open a group, admit jobs in descending runtime order
/// unless that would exceed `c_max`, `q_dev`, or mix stages of one parent;
/// repeat until every job is placed.
pub fn partition_qumod(jobs: &[Job], runtimes: &[Seconds], params: &GroupingParams) -> Result<Vec<Group>> {
    let groups = partition_indices(jobs, runtimes, params)?;
    Ok(groups
        .into_iter()
        .map(|g| Group::new(g.into_iter().map(|i| jobs[i].clone()).collect()))
        .collect())
}

/// Members' ids, for diagnostics.
pub fn member_ids(group: &Group) -> Vec<String> {
    group.members.iter().map(|m| m.id.clone()).collect()
}
