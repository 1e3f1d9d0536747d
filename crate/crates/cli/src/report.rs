//! Serialised schedule report: placements with their members, precedence
//! edges with delays, the makespan and the cuts that produced the jobs.

use cutsched_core::cutplan::{CutMode, CutPlan};
use cutsched_core::scheduler::{PlacementTag, PrecedenceEdge, Schedule, ScheduleOutcome};
use cutsched_core::workload::Stage;
use cutsched_core::Seconds;
use serde::{Deserialize, Serialize};

use crate::files::FORMAT_VERSION;

pub const SCHEDULE_FORMAT: &str = "cutsched-schedule";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberRef {
    pub id: String,
    pub root: String,
    pub stage: Stage,
    pub width: u32,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub index: usize,
    pub device: String,
    pub start: Seconds,
    pub finish: Seconds,
    pub mode_tag: PlacementTag,
    pub qubit_demand: u32,
    pub members: Vec<MemberRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub format: String,
    pub version: u32,
    pub mode: CutMode,
    pub makespan: Seconds,
    pub placements: Vec<PlacementRecord>,
    pub precedence: Vec<PrecedenceEdge>,
    pub mandatory_cuts: Vec<CutPlan>,
    pub adaptive_cuts: Vec<CutPlan>,
    /// Makespan at the start of each pass of the adaptive loop.
    pub iteration_makespans: Vec<Seconds>,
}

pub fn placement_records(schedule: &Schedule) -> Vec<PlacementRecord> {
    schedule
        .placements
        .iter()
        .enumerate()
        .map(|(index, p)| PlacementRecord {
            index,
            device: p.device.clone(),
            start: p.start,
            finish: p.finish,
            mode_tag: p.mode_tag,
            qubit_demand: p.group.qubit_demand,
            members: p
                .group
                .members
                .iter()
                .map(|m| MemberRef {
                    id: m.id.clone(),
                    root: m.root_id().to_string(),
                    stage: m.stage,
                    width: m.width(),
                    shots: m.shots,
                })
                .collect(),
        })
        .collect()
}

impl ScheduleReport {
    pub fn new(mode: CutMode, outcome: &ScheduleOutcome) -> ScheduleReport {
        ScheduleReport {
            format: SCHEDULE_FORMAT.to_string(),
            version: FORMAT_VERSION,
            mode,
            makespan: outcome.schedule.makespan,
            placements: placement_records(&outcome.schedule),
            precedence: outcome.schedule.precedence.clone(),
            mandatory_cuts: outcome.mandatory_cuts.clone(),
            adaptive_cuts: outcome.adaptive_cuts.clone(),
            iteration_makespans: outcome.iteration_makespans.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}
