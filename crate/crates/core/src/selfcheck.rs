//! Oracle-equivalence suites runnable outside the test harness.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutplan::{find_bipartition, CutMode};
use crate::fleet::{runtime_estimate, Device, Fleet};
use crate::grouping::{partition_qumod, GroupingParams};
use crate::oracles::{brute_assign, brute_min_cut, brute_partition, OracleGroup, OracleLimit};
use crate::scheduler::{generate_initial_schedule, Schedule, SchedulerConfig};
use crate::workload::{Circuit, Job, Stage};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Random weighted graph on 2..=12 qubits with a feasible size bound.
pub fn random_small_circuit<R: Rng>(rng: &mut R) -> (Circuit, u32) {
    let n = rng.gen_range(2..=12u32);
    let density = rng.gen_range(0.15..0.7);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b, rng.gen_range(1..=4)));
            }
        }
    }
    let q = rng.gen_range(n.div_ceil(2)..=n - 1).max(1);
    (Circuit::new("rand", n, 1, edges, 0).expect("edges in range"), q)
}

/// Random instance whose greedy schedule has at most four groups, on two
/// or three devices with identical link parameters.
pub fn random_assignment_instance<R: Rng>(rng: &mut R, tag: usize) -> (Vec<Job>, Fleet) {
    let devices = rng.gen_range(2..=3usize);
    let caps = [20u32, 16, 12];
    let fleet = Fleet::new(
        (0..devices)
            .map(|d| Device {
                name: format!("dev{d}"),
                num_qubits: caps[d],
                err_1q: 1e-4,
                err_2q: 1e-3 * (d + 1) as f64,
                err_readout: 1e-2,
                t_1q: 5e-8,
                t_2q: rng.gen_range(3e-7..9e-7),
                t_readout: 2e-6,
                t_load: rng.gen_range(0.1..1.0),
                tau_link: 1e-6,
                gamma_proc: 1e-2,
            })
            .collect(),
    )
    .expect("valid synthetic fleet");
    // jobs wider than half the largest device never share a group
    let count = rng.gen_range(1..=4usize);
    let jobs = (0..count)
        .map(|i| {
            let width = rng.gen_range(11..=20u32);
            let depth = rng.gen_range(5..=120u32);
            let c = Circuit::new("c", width, depth, (0..width - 1).map(|q| (q, q + 1, 1)), 0).expect("line");
            Job::flat(format!("t{tag}j{i}"), c, rng.gen_range(100..=4000), 0.0)
        })
        .collect();
    (jobs, fleet)
}

/// Oracle view of a schedule's groups.
pub fn oracle_groups(schedule: &Schedule, fleet: &Fleet) -> Vec<OracleGroup> {
    schedule
        .placements
        .iter()
        .enumerate()
        .map(|(i, p)| OracleGroup {
            runtime_on: fleet
                .devices
                .iter()
                .map(|d| {
                    p.group
                        .members
                        .iter()
                        .map(|m| runtime_estimate(m, d).ok())
                        .try_fold(0.0f64, |acc, rt| rt.map(|r| acc.max(r)))
                })
                .collect(),
            release: p.group.members.iter().map(|m| m.arrival_time).fold(0.0, f64::max),
            preds: schedule
                .precedence
                .iter()
                .filter(|e| e.downstream == i)
                .map(|e| (e.upstream, e.delay))
                .collect(),
        })
        .collect()
}

fn random_job_set<R: Rng>(rng: &mut R) -> Vec<Job> {
    let n = rng.gen_range(1..=8usize);
    (0..n)
        .map(|i| {
            let width = rng.gen_range(1..=8u32);
            let c = Circuit::new("c", width, rng.gen_range(1..=50), [], 0).expect("no edges");
            let mut j = Job::flat(format!("j{i}"), c, 100, 0.0);
            if rng.gen_bool(0.5) {
                j.parent_id = Some(format!("p{}", rng.gen_range(0..2)));
                j.cut_index = Some(0);
                j.n_cut = 1;
                j.stage = if rng.gen_bool(0.5) {
                    Stage::Upstream
                } else {
                    Stage::Downstream
                };
            }
            j
        })
        .collect()
}

fn min_cut_suite(seed: u64, cases: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = OracleLimit::default();
    let mut mismatches = 0;
    for _ in 0..cases {
        let (c, q) = random_small_circuit(&mut rng);
        let got = find_bipartition(&c, q)?.n_cut;
        if u64::from(got) != brute_min_cut(&c, q, &limit)? {
            mismatches += 1;
        }
    }
    Ok(CheckReport {
        name: "min-cut vs exhaustive",
        passed: mismatches == 0,
        detail: format!("{cases} circuits, {mismatches} mismatches"),
    })
}

fn grouping_suite(seed: u64, cases: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = OracleLimit::default();
    let mut failures = 0;
    for _ in 0..cases {
        let jobs = random_job_set(&mut rng);
        let runtimes: Vec<f64> = jobs.iter().map(|_| rng.gen_range(0.5..5.0)).collect();
        let params = GroupingParams {
            q_dev: 8,
            c_max: rng.gen_range(1..=4),
            lambda: 1.0,
        };
        let greedy = partition_qumod(&jobs, &runtimes, &params)?.len();
        let best = brute_partition(&jobs, &runtimes, params.q_dev, params.c_max, params.lambda, &limit)?;
        if greedy < best.min_groups || greedy > 2 * best.min_groups {
            failures += 1;
        }
    }
    Ok(CheckReport {
        name: "grouping count vs exhaustive",
        passed: failures == 0,
        detail: format!("{cases} job sets, {failures} outside [min, 2*min]"),
    })
}

fn assignment_suite(seed: u64, cases: usize) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = OracleLimit::default();
    let mut worst: f64 = 1.0;
    for case in 0..cases {
        let (jobs, fleet) = random_assignment_instance(&mut rng, case);
        let mut config = SchedulerConfig::new(CutMode::Lo);
        config.lambda_fidelity = 0.0;
        let schedule = generate_initial_schedule(&jobs, &fleet, &config)?;
        let optimum = brute_assign(&oracle_groups(&schedule, &fleet), fleet.devices.len(), &limit)?;
        worst = worst.max(schedule.makespan / optimum);
    }
    Ok(CheckReport {
        name: "assignment makespan vs exhaustive",
        passed: worst <= 1.5,
        detail: format!("{cases} instances, worst ratio {worst:.4}"),
    })
}

/// Runs the three suites with fixed seeds.
pub fn self_check() -> Result<Vec<CheckReport>> {
    Ok(alloc::vec![
        min_cut_suite(0x5eed_0001, 200)?,
        grouping_suite(0x5eed_0002, 300)?,
        assignment_suite(0x5eed_0003, 100)?,
    ])
}
