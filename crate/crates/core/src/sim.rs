//! Discrete-event simulation of a queued fleet.
//!
//! Jobs arrive over time and wait in a queue. Whenever something happens
//! (an arrival, a group finishing, or a planned start coming due) and some
//! device is idle, the scheduler plans the oldest `window` queued jobs from
//! the current state; groups planned to start right away are committed and
//! run to completion, everything else is re-planned at the next event.
//!
//! The run is recorded as a [`Trace`] that carries everything needed to
//! recompute the [`Metrics`].

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::cutplan::{classical_delay, overhead, try_cut_plan, CutMode, OverheadKind};
use crate::fleet::{lpst_unchecked, runtime_unchecked, Fleet};
use crate::grouping::Group;
use crate::scheduler::{
    parent_delay, qumod_schedule_in, Placement, PlacementTag, PlanContext, PrecedenceEdge, Schedule, SchedulerConfig,
};
use crate::workload::{validate_jobs, Job, Stage};
use crate::{Error, Result, Seconds};

const START_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    GroupFinish(usize),
    Arrival(usize),
    GroupStart(usize),
    WindowDispatch,
}

impl EventKind {
    fn ordinal(&self) -> u8 {
        match self {
            EventKind::GroupFinish(_) => 0,
            EventKind::Arrival(_) => 1,
            EventKind::GroupStart(_) => 2,
            EventKind::WindowDispatch => 3,
        }
    }
}

/// Queued simulation event, ordered by `(time, kind ordinal, seq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: Seconds,
    pub kind: EventKind,
    pub seq: u64,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.ordinal().cmp(&other.kind.ordinal()))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One executed (sub-)job inside a started group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub id: String,
    /// The original job this unit belongs to.
    pub root: String,
    pub stage: Stage,
    pub width: u32,
    pub shots: u64,
    pub n_cut: u32,
    pub lpst: f64,
}

/// Trace record. Times are absolute simulation seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum TraceEvent {
    Arrival {
        time: Seconds,
        job: String,
    },
    Cut {
        time: Seconds,
        job: String,
        mode: CutMode,
        n_cut: u32,
        sub_jobs: u64,
        mandatory: bool,
    },
    Dispatch {
        time: Seconds,
        queued: usize,
    },
    GroupStart {
        time: Seconds,
        placement: usize,
        device: String,
        finish: Seconds,
        members: Vec<MemberRecord>,
    },
    GroupFinish {
        time: Seconds,
        placement: usize,
        device: String,
    },
    Dropped {
        time: Seconds,
        job: String,
        reason: String,
    },
}

impl TraceEvent {
    pub fn time(&self) -> Seconds {
        match self {
            TraceEvent::Arrival { time, .. }
            | TraceEvent::Cut { time, .. }
            | TraceEvent::Dispatch { time, .. }
            | TraceEvent::GroupStart { time, .. }
            | TraceEvent::GroupFinish { time, .. }
            | TraceEvent::Dropped { time, .. } => *time,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

/// Aggregate queueing and execution metrics of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub avg_queue_length: f64,
    pub t_wait: Seconds,
    pub t_run: Seconds,
    pub t_total: Seconds,
    pub mean_lpst: f64,
    pub workload_changes: u64,
    pub makespan: Seconds,
    pub completed: u64,
    pub dropped: u64,
}

/// Everything a simulation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub metrics: Metrics,
    pub trace: Trace,
    /// Executed placements in start order, with precedence edges.
    pub schedule: Schedule,
}

/// Per original job: arrival, first start, last finish, drop time.
#[derive(Debug, Default, Clone, Copy)]
struct JobTimes {
    arrival: Option<Seconds>,
    first_start: Option<Seconds>,
    last_finish: Option<Seconds>,
    dropped: Option<Seconds>,
}

fn job_times(trace: &Trace) -> BTreeMap<&str, JobTimes> {
    let mut times: BTreeMap<&str, JobTimes> = BTreeMap::new();
    for ev in &trace.events {
        match ev {
            TraceEvent::Arrival { time, job } => times.entry(job).or_default().arrival = Some(*time),
            TraceEvent::Dropped { time, job, .. } => times.entry(job).or_default().dropped = Some(*time),
            TraceEvent::GroupStart {
                time, finish, members, ..
            } => {
                for m in members {
                    let t = times.entry(&m.root).or_default();
                    t.first_start = Some(t.first_start.map_or(*time, |s| s.min(*time)));
                    t.last_finish = Some(t.last_finish.map_or(*finish, |f| f.max(*finish)));
                }
            }
            _ => {}
        }
    }
    times
}

fn horizon(trace: &Trace) -> Seconds {
    trace.events.iter().fold(0.0, |h, ev| {
        let end = match ev {
            TraceEvent::GroupStart { finish, .. } => *finish,
            other => other.time(),
        };
        h.max(end)
    })
}

/// Time-averaged number of queued jobs: the integral of the queue-size step
/// function over `[0, horizon]` divided by the horizon. A job is queued from
/// its arrival until its first group starts (or it is dropped).
pub fn time_weighted_queue_length(trace: &Trace) -> f64 {
    let horizon = horizon(trace);
    if !(horizon > 0.0) {
        return 0.0;
    }
    let mut steps: Vec<(Seconds, i64)> = Vec::new();
    for t in job_times(trace).values() {
        let Some(arrival) = t.arrival else { continue };
        steps.push((arrival, 1));
        let leave = t.first_start.or(t.dropped).unwrap_or(horizon);
        steps.push((leave, -1));
    }
    steps.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut area = 0.0;
    let mut size = 0i64;
    let mut last = 0.0;
    for (t, delta) in steps {
        area += size as f64 * (t - last);
        size += delta;
        last = t;
    }
    area / horizon
}

/// Recomputes metrics from a trace.
pub fn metrics_from_trace(trace: &Trace) -> Metrics {
    let times = job_times(trace);
    let (mut wait, mut run, mut total) = (0.0, 0.0, 0.0);
    let mut completed = 0u64;
    let mut dropped = 0u64;
    for t in times.values() {
        if t.dropped.is_some() {
            dropped += 1;
            continue;
        }
        if let (Some(a), Some(s), Some(f)) = (t.arrival, t.first_start, t.last_finish) {
            let w = s - a;
            let r = f - s;
            wait += w;
            run += r;
            total += w + r;
            completed += 1;
        }
    }

    let mut lpst_sum = 0.0;
    let mut lpst_n = 0u64;
    let mut changes = 0u64;
    let mut makespan: f64 = 0.0;
    let mut last_set: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for ev in &trace.events {
        if let TraceEvent::GroupStart {
            device,
            finish,
            members,
            ..
        } = ev
        {
            for m in members {
                lpst_sum += m.lpst;
                lpst_n += 1;
            }
            let mut set: Vec<&str> = members.iter().map(|m| m.id.as_str()).collect();
            set.sort_unstable();
            if last_set.get(device.as_str()) != Some(&set) {
                changes += 1;
            }
            last_set.insert(device, set);
            makespan = makespan.max(*finish);
        }
    }

    let n = completed.max(1) as f64;
    Metrics {
        avg_queue_length: time_weighted_queue_length(trace),
        t_wait: if completed > 0 { wait / n } else { 0.0 },
        t_run: if completed > 0 { run / n } else { 0.0 },
        t_total: if completed > 0 { total / n } else { 0.0 },
        mean_lpst: if lpst_n > 0 { lpst_sum / lpst_n as f64 } else { 0.0 },
        workload_changes: changes,
        makespan,
        completed,
        dropped,
    }
}

struct QueueEntry {
    root: String,
    items: Vec<Job>,
}

struct Sim<'a> {
    workload: &'a [Job],
    fleet: &'a Fleet,
    config: &'a SchedulerConfig,
    max_q: u32,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    queue: Vec<QueueEntry>,
    busy_until: BTreeMap<String, Seconds>,
    running: BTreeMap<String, usize>,
    /// root -> earliest start for its downstream fragments
    upstream_release: BTreeMap<String, Seconds>,
    pending_dispatch: BTreeSet<u64>,
    executed: Vec<Placement>,
    trace: Trace,
}

impl Sim<'_> {
    fn push(&mut self, time: Seconds, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Reverse(Event {
            time,
            kind,
            seq: self.seq,
        }));
    }

    fn arrive(&mut self, index: usize, now: Seconds) -> Result<()> {
        let job = &self.workload[index];
        self.trace.events.push(TraceEvent::Arrival {
            time: now,
            job: job.id.clone(),
        });
        if job.width() <= self.max_q {
            self.queue.push(QueueEntry {
                root: job.id.clone(),
                items: alloc::vec![job.clone()],
            });
            return Ok(());
        }
        let reason = match try_cut_plan(job, self.config.mode, self.max_q, &self.config.budget, true) {
            Ok(Some((plan, subs))) => {
                self.trace.events.push(TraceEvent::Cut {
                    time: now,
                    job: job.id.clone(),
                    mode: plan.mode,
                    n_cut: plan.n_cut,
                    sub_jobs: subs.len() as u64,
                    mandatory: true,
                });
                self.queue.push(QueueEntry {
                    root: job.id.clone(),
                    items: subs,
                });
                return Ok(());
            }
            Ok(None) => "cut rejected".to_string(),
            Err(e @ (Error::InfeasibleCut { .. } | Error::Overflow(_))) => format!("{e}"),
            Err(e) => return Err(e),
        };
        self.trace.events.push(TraceEvent::Dropped {
            time: now,
            job: job.id.clone(),
            reason,
        });
        Ok(())
    }

    fn drop_root(&mut self, root: &str, now: Seconds, reason: String) {
        self.queue.retain(|e| e.root != root);
        self.trace.events.push(TraceEvent::Dropped {
            time: now,
            job: root.to_string(),
            reason,
        });
    }

    fn dispatch(&mut self, now: Seconds) -> Result<()> {
        loop {
            if self.queue.is_empty() || self.running.len() == self.fleet.devices.len() {
                return Ok(());
            }
            let window = self.config.window.min(self.queue.len());
            let batch: Vec<Job> = self.queue[..window]
                .iter()
                .flat_map(|e| e.items.iter().cloned())
                .collect();
            self.trace.events.push(TraceEvent::Dispatch {
                time: now,
                queued: self.queue.len(),
            });
            let ctx = PlanContext {
                now,
                device_ready: self
                    .busy_until
                    .iter()
                    .filter(|(d, _)| self.running.contains_key(*d))
                    .map(|(d, &t)| (d.clone(), t))
                    .collect(),
                upstream_release: self.upstream_release.clone(),
            };
            let outcome = match qumod_schedule_in(&batch, self.fleet, self.config, &ctx) {
                Ok(o) => o,
                Err(Error::Unschedulable { job }) => {
                    let root = batch
                        .iter()
                        .find(|j| j.id == job)
                        .map_or(job.clone(), |j| j.root_id().to_string());
                    self.drop_root(&root, now, format!("job {job} fits no device"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            for plan in &outcome.adaptive_cuts {
                let subs: Vec<Job> = outcome
                    .jobs
                    .iter()
                    .filter(|j| j.parent_id.as_deref() == Some(plan.parent_id.as_str()))
                    .cloned()
                    .collect();
                self.trace.events.push(TraceEvent::Cut {
                    time: now,
                    job: plan.parent_id.clone(),
                    mode: plan.mode,
                    n_cut: plan.n_cut,
                    sub_jobs: subs.len() as u64,
                    mandatory: false,
                });
                if let Some(entry) = self.queue.iter_mut().find(|e| e.root == plan.parent_id) {
                    entry.items = subs;
                }
            }

            let schedule = outcome.schedule;
            let mut next_start: Option<Seconds> = None;
            for i in schedule.chronological() {
                let p = &schedule.placements[i];
                if p.start > now + START_EPS {
                    next_start = Some(next_start.map_or(p.start, |t: f64| t.min(p.start)));
                    continue;
                }
                if self.running.contains_key(&p.device) {
                    return Err(Error::Validation(format!(
                        "planned start on busy device {} at {now}",
                        p.device
                    )));
                }
                self.start(p, now);
            }
            self.queue.retain(|e| !e.items.is_empty());
            if let Some(t) = next_start {
                if self.pending_dispatch.insert(t.to_bits()) {
                    self.push(t, EventKind::WindowDispatch);
                }
            }
            return Ok(());
        }
    }

    fn start(&mut self, planned: &Placement, now: Seconds) {
        let device = self.fleet.device(&planned.device).expect("planned on a fleet device");
        let members = planned.group.members.clone();
        let exec = members.iter().map(|m| runtime_unchecked(m, device)).fold(0.0, f64::max);
        let finish = now + exec;
        let index = self.executed.len();

        let ids: BTreeSet<&str> = members.iter().map(|m| m.id.as_str()).collect();
        for entry in &mut self.queue {
            entry.items.retain(|j| !ids.contains(j.id.as_str()));
        }
        for m in &members {
            if m.stage == Stage::Upstream {
                let delay = parent_delay(m, device, self.config.beta_comm);
                let release = self.upstream_release.entry(m.root_id().to_string()).or_insert(0.0);
                *release = release.max(finish + delay);
            }
        }
        let records = members
            .iter()
            .map(|m| MemberRecord {
                id: m.id.clone(),
                root: m.root_id().to_string(),
                stage: m.stage,
                width: m.width(),
                shots: m.shots,
                n_cut: m.n_cut,
                lpst: lpst_unchecked(m, device),
            })
            .collect();
        self.trace.events.push(TraceEvent::GroupStart {
            time: now,
            placement: index,
            device: device.name.clone(),
            finish,
            members: records,
        });
        self.busy_until.insert(device.name.clone(), finish);
        self.running.insert(device.name.clone(), index);
        let mut group = Group::new(members);
        group.runtime_bound = exec;
        self.executed.push(Placement {
            group,
            device: device.name.clone(),
            start: now,
            finish,
            mode_tag: planned.mode_tag,
        });
        self.push(finish, EventKind::GroupFinish(index));
    }

    fn finish(&mut self, index: usize, now: Seconds) {
        let device = self.executed[index].device.clone();
        self.running.remove(&device);
        self.trace.events.push(TraceEvent::GroupFinish {
            time: now,
            placement: index,
            device,
        });
    }

    fn executed_schedule(&self) -> Schedule {
        let placements = self.executed.clone();
        let mut precedence = Vec::new();
        // root -> upstream placement indices
        let mut ups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, p) in placements.iter().enumerate() {
            if p.mode_tag == PlacementTag::UpstreamGroup {
                for m in p.group.members.iter().filter(|m| m.stage == Stage::Upstream) {
                    let list = ups.entry(m.root_id()).or_default();
                    if list.last() != Some(&i) {
                        list.push(i);
                    }
                }
            }
        }
        for (i, p) in placements.iter().enumerate() {
            let mut edges: BTreeMap<usize, Seconds> = BTreeMap::new();
            for m in p.group.members.iter().filter(|m| m.stage == Stage::Downstream) {
                for &u in ups.get(m.root_id()).map(Vec::as_slice).unwrap_or(&[]) {
                    let device = self.fleet.device(&placements[u].device).expect("fleet device");
                    let delay = parent_delay(m, device, self.config.beta_comm);
                    let slot = edges.entry(u).or_insert(0.0);
                    *slot = slot.max(delay);
                }
            }
            precedence.extend(edges.into_iter().map(|(u, delay)| PrecedenceEdge {
                upstream: u,
                downstream: i,
                delay,
            }));
        }
        let makespan = placements.iter().map(|p| p.finish).fold(0.0, f64::max);
        Schedule {
            placements,
            precedence,
            makespan,
        }
    }
}

/// Runs the workload through the event loop until every job has executed
/// or been dropped.
pub fn simulate(workload: &[Job], fleet: &Fleet, config: &SchedulerConfig) -> Result<SimOutcome> {
    config.validate()?;
    fleet.validate()?;
    validate_jobs(workload)?;
    if let Some(j) = workload.iter().find(|j| j.is_sub_job()) {
        return Err(Error::Validation(format!(
            "job {}: workloads hold original jobs only",
            j.id
        )));
    }
    let mut order: Vec<usize> = (0..workload.len()).collect();
    order.sort_by(|&a, &b| {
        workload[a]
            .arrival_time
            .total_cmp(&workload[b].arrival_time)
            .then_with(|| workload[a].id.cmp(&workload[b].id))
    });

    let mut sim = Sim {
        workload,
        fleet,
        config,
        max_q: fleet.max_capacity(),
        heap: BinaryHeap::new(),
        seq: 0,
        queue: Vec::new(),
        busy_until: BTreeMap::new(),
        running: BTreeMap::new(),
        upstream_release: BTreeMap::new(),
        pending_dispatch: BTreeSet::new(),
        executed: Vec::new(),
        trace: Trace::default(),
    };
    for i in order {
        sim.push(workload[i].arrival_time, EventKind::Arrival(i));
    }

    while let Some(Reverse(event)) = sim.heap.pop() {
        let now = event.time;
        match event.kind {
            EventKind::Arrival(i) => sim.arrive(i, now)?,
            EventKind::GroupFinish(i) => sim.finish(i, now),
            EventKind::WindowDispatch => {
                sim.pending_dispatch.remove(&now.to_bits());
            }
            EventKind::GroupStart(_) => {}
        }
        let more_now = sim.heap.peek().is_some_and(|Reverse(e)| e.time == now);
        if !more_now {
            sim.dispatch(now)?;
        }
    }

    if let Some(entry) = sim.queue.first() {
        return Err(Error::Validation(format!(
            "simulation ended with job {} still queued",
            entry.root
        )));
    }
    let schedule = sim.executed_schedule();
    let metrics = metrics_from_trace(&sim.trace);
    Ok(SimOutcome {
        metrics,
        trace: sim.trace,
        schedule,
    })
}

/// Human-readable reason an executed trace breaks an invariant, if any.
///
/// Checks, from the trace alone: every finish matches an earlier start on
/// the same device, devices run one group at a time within capacity, every
/// downstream fragment starts no earlier than each upstream fragment of its
/// parent finished plus the classical delay, and every completed job ran
/// each of its (sub-)jobs exactly once.
pub fn check_trace(trace: &Trace, fleet: &Fleet, beta_comm: f64) -> core::result::Result<(), String> {
    const EPS: f64 = 1e-9;
    struct Run<'t> {
        device: &'t str,
        start: Seconds,
        finish: Seconds,
    }
    let mut runs: BTreeMap<usize, Run<'_>> = BTreeMap::new();
    let mut last_on: BTreeMap<&str, Seconds> = BTreeMap::new();
    let mut executed: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut expected: BTreeMap<&str, u64> = BTreeMap::new();
    let mut dropped: BTreeSet<&str> = BTreeSet::new();
    // root -> (upstream finish + delay) and downstream starts
    let mut up_release: BTreeMap<&str, Seconds> = BTreeMap::new();
    let mut down_start: BTreeMap<&str, Seconds> = BTreeMap::new();
    let mut last_time = f64::NEG_INFINITY;

    for ev in &trace.events {
        if ev.time() + EPS < last_time {
            return Err(format!("trace goes back in time at {}", ev.time()));
        }
        last_time = last_time.max(ev.time());
        match ev {
            TraceEvent::Arrival { job, .. } => {
                expected.insert(job, 1);
            }
            TraceEvent::Cut { job, sub_jobs, .. } => {
                expected.insert(job, *sub_jobs);
            }
            TraceEvent::Dropped { job, .. } => {
                dropped.insert(job);
            }
            TraceEvent::GroupStart {
                time,
                placement,
                device,
                finish,
                members,
            } => {
                let dev = fleet
                    .device(device)
                    .ok_or_else(|| format!("group on unknown device {device}"))?;
                if !(*finish > *time) {
                    return Err(format!("placement {placement} has non-positive duration"));
                }
                if last_on.get(device.as_str()).is_some_and(|&busy| *time + EPS < busy) {
                    return Err(format!("placement {placement} overlaps the previous group on {device}"));
                }
                last_on.insert(device, *finish);
                let demand: u64 = members.iter().map(|m| u64::from(m.width)).sum();
                if demand > u64::from(dev.num_qubits) {
                    return Err(format!(
                        "placement {placement} needs {demand} > {} qubits",
                        dev.num_qubits
                    ));
                }
                for m in members {
                    if !executed.entry(&m.root).or_default().insert(&m.id) {
                        return Err(format!("job {} executed twice", m.id));
                    }
                    match m.stage {
                        Stage::Upstream => {
                            let n_sub = overhead(OverheadKind::Locc, m.n_cut).map_or(u64::MAX, |v| v.saturating_mul(2));
                            let delay =
                                classical_delay(m.n_cut, m.shots, beta_comm, dev.tau_link, dev.gamma_proc, n_sub);
                            let r = up_release.entry(&m.root).or_insert(f64::NEG_INFINITY);
                            *r = r.max(*finish + delay);
                        }
                        Stage::Downstream => {
                            let s = down_start.entry(&m.root).or_insert(f64::INFINITY);
                            *s = s.min(*time);
                        }
                        Stage::Flat => {}
                    }
                }
                if runs
                    .insert(
                        *placement,
                        Run {
                            device,
                            start: *time,
                            finish: *finish,
                        },
                    )
                    .is_some()
                {
                    return Err(format!("placement {placement} started twice"));
                }
            }
            TraceEvent::GroupFinish {
                time,
                placement,
                device,
            } => {
                let run = runs
                    .get(placement)
                    .ok_or_else(|| format!("placement {placement} finished before starting"))?;
                if run.device != device || (run.finish - *time).abs() > EPS || *time < run.start {
                    return Err(format!("placement {placement} finish does not match its start"));
                }
            }
            TraceEvent::Dispatch { .. } => {}
        }
    }
    for (root, &start) in &down_start {
        if let Some(&release) = up_release.get(root) {
            if start + EPS < release {
                return Err(format!(
                    "downstream of {root} starts at {start} before release {release}"
                ));
            }
        }
    }
    for (root, &count) in &expected {
        if dropped.contains(root) {
            continue;
        }
        let ran = executed.get(root).map_or(0, |s| s.len() as u64);
        if ran != count {
            return Err(format!("job {root} ran {ran} of {count} (sub-)jobs"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::{default_fleet, runtime_estimate, Device};
    use crate::workload::Circuit;
    use alloc::vec;

    fn job(id: &str, q: u32, arrival: f64) -> Job {
        let c = Circuit::new(id, q, 10, (0..q - 1).map(|i| (i, i + 1, 1)), 5).unwrap();
        Job::flat(id, c, 1000, arrival)
    }

    #[test]
    fn empty_workload_has_zero_metrics() {
        let out = simulate(&[], &default_fleet(), &SchedulerConfig::new(CutMode::Lo)).unwrap();
        assert_eq!(out.metrics, Metrics::default());
        assert!(out.trace.events.is_empty());
    }

    #[test]
    fn single_job_single_device() {
        let d = Device {
            name: "d".into(),
            num_qubits: 10,
            err_1q: 1e-4,
            err_2q: 1e-3,
            err_readout: 1e-2,
            t_1q: 5e-8,
            t_2q: 5e-7,
            t_readout: 2e-6,
            t_load: 0.5,
            tau_link: 1e-6,
            gamma_proc: 1e-2,
        };
        let fleet = Fleet::new(vec![d.clone()]).unwrap();
        let j = job("a", 4, 1.5);
        let out = simulate(core::slice::from_ref(&j), &fleet, &SchedulerConfig::new(CutMode::Lo)).unwrap();
        let rt = runtime_estimate(&j, &d).unwrap();
        assert_eq!(out.metrics.t_wait, 0.0);
        assert!((out.metrics.t_run - rt).abs() < 1e-12);
        assert!((out.metrics.t_total - rt).abs() < 1e-12);
        assert_eq!(out.metrics.workload_changes, 1);
        assert_eq!(out.metrics.completed, 1);
    }

    fn start(time: f64, finish: f64, root: &str) -> TraceEvent {
        TraceEvent::GroupStart {
            time,
            placement: 0,
            device: "d".into(),
            finish,
            members: vec![MemberRecord {
                id: root.into(),
                root: root.into(),
                stage: Stage::Flat,
                width: 1,
                shots: 1,
                n_cut: 0,
                lpst: -0.5,
            }],
        }
    }

    #[test]
    fn queue_length_step_integral() {
        assert_eq!(time_weighted_queue_length(&Trace::default()), 0.0);
        let trace = Trace {
            events: vec![
                TraceEvent::Arrival {
                    time: 0.0,
                    job: "a".into(),
                },
                start(2.0, 4.0, "a"),
            ],
        };
        assert_eq!(time_weighted_queue_length(&trace), 0.5);
        let doubled = Trace {
            events: vec![
                TraceEvent::Arrival {
                    time: 0.0,
                    job: "a".into(),
                },
                TraceEvent::Arrival {
                    time: 0.0,
                    job: "b".into(),
                },
                start(2.0, 4.0, "a"),
                start(2.0, 4.0, "b"),
            ],
        };
        assert_eq!(time_weighted_queue_length(&doubled), 1.0);
    }

    #[test]
    fn replay_recomputes_metrics() {
        let jobs: Vec<Job> = (0..12)
            .map(|i| job(&format!("j{i:02}"), 5 + 7 * i, f64::from(i) * 0.3))
            .collect();
        let out = simulate(&jobs, &default_fleet(), &SchedulerConfig::new(CutMode::Locc)).unwrap();
        assert_eq!(metrics_from_trace(&out.trace), out.metrics);
        assert_eq!(out.metrics.completed, 12);
        let m = out.metrics;
        assert!((m.t_total - (m.t_wait + m.t_run)).abs() <= 1e-9 * m.t_total.max(1.0));
    }

    #[test]
    fn event_order() {
        let a = Event {
            time: 1.0,
            kind: EventKind::Arrival(0),
            seq: 5,
        };
        let f = Event {
            time: 1.0,
            kind: EventKind::GroupFinish(0),
            seq: 9,
        };
        let later = Event {
            time: 2.0,
            kind: EventKind::GroupFinish(0),
            seq: 1,
        };
        assert!(f < a && a < later);
    }

    #[test]
    fn executed_locc_trace_passes_checks() {
        let mut jobs: Vec<Job> = (0..6)
            .map(|i| job(&format!("j{i}"), 20 + 15 * i, f64::from(i)))
            .collect();
        jobs.push(job("wide", 142, 0.5));
        let fleet = default_fleet();
        let config = SchedulerConfig::new(CutMode::Locc);
        let out = simulate(&jobs, &fleet, &config).unwrap();
        check_trace(&out.trace, &fleet, config.beta_comm).unwrap();
        assert!(out
            .trace
            .events
            .iter()
            .any(|e| matches!(e, TraceEvent::Cut { job, mandatory: true, .. } if job == "wide")));

        // pull one downstream group earlier than its release
        let mut bad = out.trace.clone();
        let pos = bad
            .events
            .iter()
            .position(|e| matches!(e, TraceEvent::GroupStart { members, .. } if members.iter().any(|m| m.stage == Stage::Downstream)))
            .unwrap();
        if let TraceEvent::GroupStart { time, .. } = &mut bad.events[pos] {
            *time = 0.5;
        }
        assert!(check_trace(&bad, &fleet, config.beta_comm).is_err());

        // lose one sub-job
        let mut short = out.trace.clone();
        let pos = short
            .events
            .iter()
            .position(
                |e| matches!(e, TraceEvent::GroupStart { members, .. } if members.iter().any(|m| m.root == "wide")),
            )
            .unwrap();
        if let TraceEvent::GroupStart { members, .. } = &mut short.events[pos] {
            members.retain(|m| m.root != "wide");
        }
        assert!(check_trace(&short, &fleet, config.beta_comm).is_err());
    }
}
