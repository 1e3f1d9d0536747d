//! Placement of job groups onto fleet devices.
//!
//! [`generate_initial_schedule`] groups jobs (Flat and Upstream in one pool,
//! Downstream in another) and list-schedules the groups onto devices by
//! earliest finish with a fidelity bonus, honouring LOCC precedence with
//! classical delays. [`qumod_schedule`] wraps it in the adaptive loop: cut
//! jobs that are too wide for any device, then keep trying optional cuts
//! while free qubit slots can absorb the fragments and the makespan does
//! not grow.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cutplan::{
    classical_delay, overhead, try_cut_plan, CutBudget, CutMode, CutPlan, OverheadKind, DEFAULT_BETA_COMM,
};
use crate::fleet::{lpst_unchecked, runtime_unchecked, Device, Fleet};
use crate::grouping::{partition_subset, sort_by_runtime, Group, GroupingParams};
use crate::workload::{Job, Stage};
use crate::{Error, Result, Seconds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlacementTag {
    Plain,
    UpstreamGroup,
    DownstreamGroup,
}

/// A group bound to a device and a time interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub group: Group,
    pub device: String,
    pub start: Seconds,
    pub finish: Seconds,
    pub mode_tag: PlacementTag,
}

/// `placements[downstream].start >= placements[upstream].finish + delay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecedenceEdge {
    pub upstream: usize,
    pub downstream: usize,
    pub delay: Seconds,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub placements: Vec<Placement>,
    pub precedence: Vec<PrecedenceEdge>,
    pub makespan: Seconds,
}

impl Schedule {
    /// Placement indices ordered by start time, then device name, then
    /// creation order.
    pub fn chronological(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.placements.len()).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (&self.placements[a], &self.placements[b]);
            pa.start
                .partial_cmp(&pb.start)
                .unwrap_or(Ordering::Equal)
                .then_with(|| pa.device.cmp(&pb.device))
                .then(a.cmp(&b))
        });
        order
    }

    /// Every scheduled job, in chronological placement order.
    pub fn jobs(&self) -> impl Iterator<Item = &Job> + '_ {
        self.chronological()
            .into_iter()
            .flat_map(move |i| self.placements[i].group.members.iter())
    }
}

/// Latest finish over all placements; 0 when empty.
pub fn makespan(schedule: &Schedule) -> Seconds {
    schedule.placements.iter().map(|p| p.finish).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub mode: CutMode,
    pub budget: CutBudget,
    pub grouping: GroupingParams,
    /// Oldest queued jobs considered per scheduler invocation.
    pub window: usize,
    /// Weight of mean member LPST in device choice.
    pub lambda_fidelity: f64,
    /// Classical bits per cut per shot.
    pub beta_comm: f64,
}

impl SchedulerConfig {
    pub fn new(mode: CutMode) -> SchedulerConfig {
        SchedulerConfig {
            mode,
            budget: CutBudget::default(),
            grouping: GroupingParams::default(),
            window: 50,
            lambda_fidelity: 0.1,
            beta_comm: DEFAULT_BETA_COMM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        self.grouping.validate()?;
        if self.window == 0 {
            return Err(Error::Validation("window must be at least 1".into()));
        }
        if !(self.lambda_fidelity >= 0.0) || !self.lambda_fidelity.is_finite() {
            return Err(Error::Validation("lambda_fidelity must be non-negative".into()));
        }
        if !(self.beta_comm > 0.0) || !self.beta_comm.is_finite() {
            return Err(Error::Validation("beta_comm must be positive".into()));
        }
        Ok(())
    }
}

/// State of the world a plan starts from: the current time, when busy
/// devices free up, and the earliest start of downstream fragments whose
/// upstream siblings already ran (keyed by parent id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanContext {
    pub now: Seconds,
    pub device_ready: BTreeMap<String, Seconds>,
    pub upstream_release: BTreeMap<String, Seconds>,
}

/// Classical delay for the downstream half of `job`'s parent when its
/// upstream half ran on `device`.
pub fn parent_delay(job: &Job, device: &Device, beta_comm: f64) -> Seconds {
    let n_sub = overhead(OverheadKind::Locc, job.n_cut).map_or(u64::MAX, |v| v.saturating_mul(2));
    classical_delay(
        job.n_cut,
        job.shots,
        beta_comm,
        device.tau_link,
        device.gamma_proc,
        n_sub,
    )
}

fn tag_for(group: &[usize], jobs: &[Job]) -> PlacementTag {
    if group.iter().any(|&i| jobs[i].stage == Stage::Upstream) {
        PlacementTag::UpstreamGroup
    } else if group.iter().any(|&i| jobs[i].stage == Stage::Downstream) {
        PlacementTag::DownstreamGroup
    } else {
        PlacementTag::Plain
    }
}

/// Groups and list-schedules `jobs` from time zero on idle devices.
pub fn generate_initial_schedule(jobs: &[Job], fleet: &Fleet, config: &SchedulerConfig) -> Result<Schedule> {
    generate_schedule_in(jobs, fleet, config, &PlanContext::default())
}

/// [`generate_initial_schedule`] starting from `ctx`.
pub fn generate_schedule_in(
    jobs: &[Job],
    fleet: &Fleet,
    config: &SchedulerConfig,
    ctx: &PlanContext,
) -> Result<Schedule> {
    let max_q = fleet.max_capacity();
    if let Some(j) = jobs.iter().find(|j| j.width() > max_q) {
        return Err(Error::Unschedulable { job: j.id.clone() });
    }
    let params = GroupingParams {
        q_dev: max_q,
        ..config.grouping
    };
    params.validate()?;
    let reference = fleet.reference_device();
    let ref_runtime: Vec<Seconds> = jobs.iter().map(|j| runtime_unchecked(j, reference)).collect();

    let (down, up): (Vec<usize>, Vec<usize>) = (0..jobs.len()).partition(|&i| jobs[i].stage == Stage::Downstream);
    let mut ordered_groups: Vec<Vec<usize>> = Vec::new();
    for pool in [up, down] {
        let order = sort_by_runtime(jobs, &ref_runtime, pool);
        let groups = partition_subset(jobs, order, &params)?;
        let bounds: Vec<Seconds> = groups
            .iter()
            .map(|g| g.iter().map(|&i| ref_runtime[i]).fold(0.0, f64::max))
            .collect();
        let fits: Vec<usize> = groups
            .iter()
            .map(|g| {
                let demand: u32 = g.iter().map(|&i| jobs[i].width()).sum();
                fleet.devices.iter().filter(|d| d.num_qubits >= demand).count()
            })
            .collect();
        let mut idx: Vec<usize> = (0..groups.len()).collect();
        // least flexible first, then longest; stable, so ties keep creation order
        idx.sort_by(|&a, &b| {
            fits[a]
                .cmp(&fits[b])
                .then(bounds[b].partial_cmp(&bounds[a]).unwrap_or(Ordering::Equal))
        });
        let mut groups: Vec<Option<Vec<usize>>> = groups.into_iter().map(Some).collect();
        ordered_groups.extend(
            idx.into_iter()
                .map(|i| groups[i].take().expect("each group taken once")),
        );
    }

    let devices = fleet.sorted_devices();
    let mut ready: Vec<Seconds> = devices
        .iter()
        .map(|d| ctx.device_ready.get(&d.name).copied().unwrap_or(ctx.now).max(ctx.now))
        .collect();

    let mut schedule = Schedule::default();
    // parent -> (placement index, device index) of upstream placements
    let mut upstream_at: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();

    for group in ordered_groups {
        let demand: u32 = group.iter().map(|&i| jobs[i].width()).sum();
        let mut earliest = group.iter().map(|&i| jobs[i].arrival_time).fold(ctx.now, f64::max);

        // edges from every upstream placement holding a sibling of a member
        let mut edges: BTreeMap<usize, Seconds> = BTreeMap::new();
        for &i in &group {
            let job = &jobs[i];
            if job.stage != Stage::Downstream {
                continue;
            }
            let parent = job.parent_id.as_deref().unwrap_or(&job.id);
            if let Some(&release) = ctx.upstream_release.get(parent) {
                earliest = earliest.max(release);
            }
            for &(p, d) in upstream_at.get(parent).map(Vec::as_slice).unwrap_or(&[]) {
                let delay = parent_delay(job, devices[d], config.beta_comm);
                let slot = edges.entry(p).or_insert(0.0);
                *slot = slot.max(delay);
            }
        }
        for (&p, &delay) in &edges {
            earliest = earliest.max(schedule.placements[p].finish + delay);
        }

        let mut best: Option<(f64, usize, Seconds, Seconds)> = None;
        for (d, device) in devices.iter().enumerate() {
            if device.num_qubits < demand {
                continue;
            }
            let exec = group
                .iter()
                .map(|&i| runtime_unchecked(&jobs[i], device))
                .fold(0.0, f64::max);
            let start = ready[d].max(earliest);
            let finish = start + exec;
            let mean_lpst = group.iter().map(|&i| lpst_unchecked(&jobs[i], device)).sum::<f64>() / group.len() as f64;
            let score = if config.lambda_fidelity > 0.0 {
                finish - config.lambda_fidelity * mean_lpst
            } else {
                finish
            };
            if best.is_none_or(|(s, ..)| score < s) {
                best = Some((score, d, start, exec));
            }
        }
        let (_, d, start, exec) = best.ok_or_else(|| Error::Unschedulable {
            job: jobs[group[0]].id.clone(),
        })?;
        ready[d] = start + exec;

        let index = schedule.placements.len();
        for (&p, &delay) in &edges {
            schedule.precedence.push(PrecedenceEdge {
                upstream: p,
                downstream: index,
                delay,
            });
        }
        for &i in &group {
            if jobs[i].stage == Stage::Upstream {
                let parent = jobs[i].parent_id.as_deref().unwrap_or(&jobs[i].id);
                let list = upstream_at.entry(parent).or_default();
                if list.last() != Some(&(index, d)) {
                    list.push((index, d));
                }
            }
        }
        let tag = tag_for(&group, jobs);
        let mut g = Group::new(group.iter().map(|&i| jobs[i].clone()).collect());
        g.runtime_bound = exec;
        schedule.placements.push(Placement {
            group: g,
            device: devices[d].name.clone(),
            start,
            finish: start + exec,
            mode_tag: tag,
        });
    }
    schedule.makespan = makespan(&schedule);
    Ok(schedule)
}

/// Free slots of width `q_max_sub` left over by the placements of
/// `schedule`: the sum over placements of `floor((Q_m - demand) / q_max_sub)`.
pub fn count_slots(schedule: &Schedule, fleet: &Fleet, q_max_sub: u32) -> u64 {
    let q = u64::from(q_max_sub.max(1));
    schedule
        .placements
        .iter()
        .filter_map(|p| {
            let device = fleet.device(&p.device)?;
            let free = u64::from(device.num_qubits).saturating_sub(u64::from(p.group.qubit_demand));
            Some(free / q)
        })
        .sum()
}

/// [`count_slots`] plus `floor(Q_m / q_max_sub)` for every device that holds
/// no placement, as if it ran an empty group.
pub fn count_slots_with_idle(schedule: &Schedule, fleet: &Fleet, q_max_sub: u32) -> u64 {
    let q = u64::from(q_max_sub.max(1));
    let idle: u64 = fleet
        .devices
        .iter()
        .filter(|d| !schedule.placements.iter().any(|p| p.device == d.name))
        .map(|d| u64::from(d.num_qubits) / q)
        .sum();
    count_slots(schedule, fleet, q_max_sub) + idle
}

/// Result of [`qumod_schedule_in`], including the loop's bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOutcome {
    pub schedule: Schedule,
    /// Cuts forced because the job fits no device.
    pub mandatory_cuts: Vec<CutPlan>,
    /// Optional cuts accepted by the improvement loop, in order.
    pub adaptive_cuts: Vec<CutPlan>,
    /// Makespan of the initial schedule of each outer iteration.
    pub iteration_makespans: Vec<Seconds>,
    /// Jobs after cutting; the input of the final schedule.
    pub jobs: Vec<Job>,
}

/// Adaptive cut-and-schedule loop from time zero.
pub fn qumod_schedule(jobs: &[Job], fleet: &Fleet, config: &SchedulerConfig) -> Result<Schedule> {
    Ok(qumod_schedule_in(jobs, fleet, config, &PlanContext::default())?.schedule)
}

pub fn qumod_schedule_in(
    jobs: &[Job],
    fleet: &Fleet,
    config: &SchedulerConfig,
    ctx: &PlanContext,
) -> Result<ScheduleOutcome> {
    config.validate()?;
    fleet.validate()?;
    let max_q = fleet.max_capacity();

    let mut mandatory_cuts = Vec::new();
    let mut current: Vec<Job> = Vec::with_capacity(jobs.len());
    for job in jobs {
        if job.width() <= max_q {
            current.push(job.clone());
            continue;
        }
        if job.is_sub_job() {
            return Err(Error::Unschedulable { job: job.id.clone() });
        }
        match try_cut_plan(job, config.mode, max_q, &config.budget, true) {
            Ok(Some((plan, subs))) => {
                mandatory_cuts.push(plan);
                current.extend(subs);
            }
            Ok(None) | Err(Error::InfeasibleCut { .. } | Error::Overflow(_)) => {
                return Err(Error::Unschedulable { job: job.id.clone() })
            }
            Err(e) => return Err(e),
        }
    }

    let mut adaptive_cuts = Vec::new();
    let mut iteration_makespans = Vec::new();
    // cut proposals depend only on the job, so compute each once
    let mut proposals: BTreeMap<String, Option<(CutPlan, Vec<Job>)>> = BTreeMap::new();
    loop {
        let initial = generate_schedule_in(&current, fleet, config, ctx)?;
        let t_initial = initial.makespan;
        iteration_makespans.push(t_initial);

        let order: Vec<String> = initial
            .jobs()
            .filter(|j| config.budget.eligible(j, max_q))
            .map(|j| j.id.clone())
            .collect();
        let mut accepted = None;
        for id in order {
            let Some(pos) = current.iter().position(|j| j.id == id) else {
                continue;
            };
            if !proposals.contains_key(&id) {
                let proposal = try_cut_plan(&current[pos], config.mode, max_q, &config.budget, false)?;
                proposals.insert(id.clone(), proposal);
            }
            let Some((plan, subs)) = proposals.get(&id).and_then(Option::as_ref) else {
                continue;
            };
            let q_max_sub = subs.iter().map(Job::width).max().unwrap_or(1);
            if subs.len() as u64 > count_slots_with_idle(&initial, fleet, q_max_sub) {
                continue;
            }
            let mut candidate = Vec::with_capacity(current.len() + subs.len());
            candidate.extend_from_slice(&current[..pos]);
            candidate.extend(subs.iter().cloned());
            candidate.extend_from_slice(&current[pos + 1..]);
            let cand = generate_schedule_in(&candidate, fleet, config, ctx)?;
            if cand.makespan <= t_initial {
                accepted = Some((plan.clone(), candidate, cand));
                break;
            }
        }
        match accepted {
            Some((plan, candidate, _)) => {
                adaptive_cuts.push(plan);
                current = candidate;
            }
            None => {
                return Ok(ScheduleOutcome {
                    schedule: initial,
                    mandatory_cuts,
                    adaptive_cuts,
                    iteration_makespans,
                    jobs: current,
                })
            }
        }
    }
}

/// Human-readable reason a schedule breaks an invariant, if any. Checks
/// capacity, per-device exclusivity, causal mixing and precedence edges.
pub fn check_schedule(schedule: &Schedule, fleet: &Fleet) -> core::result::Result<(), String> {
    const EPS: f64 = 1e-9;
    let mut by_device: BTreeMap<&str, Vec<&Placement>> = BTreeMap::new();
    for (i, p) in schedule.placements.iter().enumerate() {
        let device = fleet
            .device(&p.device)
            .ok_or_else(|| format!("placement {i} on unknown device {}", p.device))?;
        if p.group.qubit_demand > device.num_qubits {
            return Err(format!(
                "placement {i} needs {} > {} qubits",
                p.group.qubit_demand, device.num_qubits
            ));
        }
        if !(p.finish > p.start) {
            return Err(format!("placement {i} has non-positive duration"));
        }
        if p.group.mixes_causal_stages() {
            return Err(format!("placement {i} mixes upstream and downstream of one parent"));
        }
        by_device.entry(&p.device).or_default().push(p);
    }
    for (device, mut list) in by_device {
        list.sort_by(|a, b| a.start.partial_cmp(&b.start).unwrap_or(Ordering::Equal));
        for w in list.windows(2) {
            if w[1].start + EPS < w[0].finish {
                return Err(format!("overlapping placements on {device}"));
            }
        }
    }
    for e in &schedule.precedence {
        let up = &schedule.placements[e.upstream];
        let down = &schedule.placements[e.downstream];
        if down.start + EPS < up.finish + e.delay {
            return Err(format!("precedence {} -> {} violated", e.upstream, e.downstream));
        }
    }
    Ok(())
}
