//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line
//! straight to stdout (bypassing the harness capture) and then asserts.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::{Duration, Instant};

use cutsched::run::{self, Overrides};
use cutsched_core::cutplan::find_bipartition;
use cutsched_core::cutplan::{overhead, try_cut, CutBudget, CutMode, OverheadKind};
use cutsched_core::fleet::default_fleet;
use cutsched_core::grouping::{group_cost, partition_qumod, GroupingParams};
use cutsched_core::oracles::{brute_assign, brute_min_cut, OracleLimit};
use cutsched_core::scheduler::{
    check_schedule, generate_initial_schedule, qumod_schedule_in, PlanContext, SchedulerConfig,
};
use cutsched_core::selfcheck::{oracle_groups, random_assignment_instance, random_small_circuit};
use cutsched_core::sim::{check_trace, simulate};
use cutsched_core::workload::{
    gen_random_circuit, gen_workload, shots_for_volume, Circuit, Job, Stage, WorkloadClass, WorkloadSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [CutMode; 2] = [CutMode::Lo, CutMode::Locc];

fn report(n: u32, passed: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let ok = passed && elapsed < limit;
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {n:>2} {verdict}: {detail} ({:.2} s, limit {} s)\n",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    assert!(ok, "criterion {n}: {detail}");
}

fn line_circuit(width: u32, weights: &[u32]) -> Circuit {
    let edges: Vec<(u32, u32, u32)> = (0..width - 1).map(|q| (q, q + 1, weights[q as usize])).collect();
    Circuit::new("line", width, 4, edges, 0).unwrap()
}

#[test]
fn c01_overhead_arithmetic() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for k in 0..=6u32 {
        for (kind, base) in [
            (OverheadKind::Lo, 9u64),
            (OverheadKind::Locc, 4),
            (OverheadKind::LoWire, 16),
        ] {
            if overhead(kind, k).unwrap() != base.pow(k) {
                bad.push(format!("{kind:?}({k})"));
            }
        }
    }
    report(
        1,
        bad.is_empty(),
        t.elapsed(),
        Duration::from_millis(1),
        &format!("21 values, mismatches {bad:?}"),
    );
}

#[test]
fn c02_sub_job_counts() {
    let t = Instant::now();
    // six-qubit line whose light middle edge is the minimum cut; capacity 5
    // leaves room for the LOCC ancillas
    let mut counts = BTreeMap::new();
    for n_cut in [1u32, 2] {
        let job = Job::flat("p", line_circuit(6, &[5, 5, n_cut, 5, 5]), 1000, 0.0);
        for mode in MODES {
            let subs = try_cut(&job, mode, 5, &CutBudget::default(), true).unwrap();
            assert!(subs.iter().all(|s| s.n_cut == n_cut));
            counts.insert((n_cut, mode.as_str()), subs.len());
        }
    }
    let expected = [((1, "LO"), 18), ((1, "LOCC"), 8), ((2, "LO"), 162), ((2, "LOCC"), 32)];
    let ok = expected.iter().all(|(k, v)| counts[k] == *v) && counts[&(1, "LOCC")] < counts[&(1, "LO")];
    report(
        2,
        ok,
        t.elapsed(),
        Duration::from_secs(1),
        &format!("counts {counts:?}"),
    );
}

#[test]
fn c03_min_cut_oracle_equivalence() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let limit = OracleLimit::default();
    let mut mismatches = 0;
    for _ in 0..200 {
        let (c, q) = random_small_circuit(&mut rng);
        assert!(c.num_qubits <= 12);
        if u64::from(find_bipartition(&c, q).unwrap().n_cut) != brute_min_cut(&c, q, &limit).unwrap() {
            mismatches += 1;
        }
    }
    report(
        3,
        mismatches == 0,
        t.elapsed(),
        Duration::from_secs(30),
        &format!("200 circuits, {mismatches} mismatches"),
    );
}

fn random_jobs(rng: &mut ChaCha8Rng) -> (Vec<Job>, Vec<f64>) {
    let n = rng.gen_range(0..=20usize);
    let jobs: Vec<Job> = (0..n)
        .map(|i| {
            let c = Circuit::new("c", rng.gen_range(1..=60), 10, [], 0).unwrap();
            let mut j = Job::flat(format!("j{i:02}"), c, 1000, 0.0);
            if rng.gen_bool(0.6) {
                j.parent_id = Some(format!("p{}", rng.gen_range(0..3)));
                j.cut_index = Some(0);
                j.n_cut = 1;
                j.stage = [Stage::Flat, Stage::Upstream, Stage::Downstream][rng.gen_range(0..3)];
            }
            j
        })
        .collect();
    let runtimes = jobs.iter().map(|_| rng.gen_range(0.1..10.0)).collect();
    (jobs, runtimes)
}

#[test]
fn c04_grouping_feasibility() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    for _ in 0..1000 {
        let (jobs, runtimes) = random_jobs(&mut rng);
        let params = GroupingParams {
            q_dev: rng.gen_range(60..=127),
            c_max: rng.gen_range(1..=6),
            lambda: rng.gen_range(0.0..2.0),
        };
        let groups = partition_qumod(&jobs, &runtimes, &params).unwrap();
        let mut seen: Vec<&str> = groups
            .iter()
            .flat_map(|g| g.members.iter().map(|m| m.id.as_str()))
            .collect();
        seen.sort_unstable();
        let mut all: Vec<&str> = jobs.iter().map(|j| j.id.as_str()).collect();
        all.sort_unstable();
        let bad_group = groups.iter().any(|g| {
            g.members.is_empty()
                || g.members.len() > params.c_max
                || g.qubit_demand > params.q_dev
                || g.mixes_causal_stages()
        });
        if bad_group || seen != all {
            violations += 1;
        }
    }
    report(
        4,
        violations == 0,
        t.elapsed(),
        Duration::from_secs(30),
        &format!("1000 job sets, {violations} violations"),
    );
}

#[test]
fn c05_grouping_cost_examples() {
    let t = Instant::now();
    let params = GroupingParams {
        lambda: 1.0,
        ..GroupingParams::default()
    };
    let flat = |id: &str| Job::flat(id, Circuit::new(id, 4, 4, [], 0).unwrap(), 100, 0.0);
    let frag = |id: &str, parent: &str, stage: Stage| {
        let mut j = flat(id);
        j.parent_id = Some(parent.into());
        j.cut_index = Some(0);
        j.n_cut = 1;
        j.stage = stage;
        j
    };
    let a = flat("a");
    let b = flat("b");
    let up = frag("u", "p", Stage::Upstream);
    let down = frag("d", "p", Stage::Downstream);
    let other_down = frag("e", "q", Stage::Downstream);
    let got = [
        group_cost(&[&a], &[3.0], &params).unwrap(),
        group_cost(&[&a, &b], &[2.0, 4.0], &params).unwrap(),
        group_cost(&[&up, &down], &[1.0, 1.0], &params).unwrap(),
        group_cost(&[&up, &other_down], &[1.0, 1.0], &params).unwrap(),
    ];
    let want = [0.0, 1.0, f64::INFINITY, 1.0];
    report(
        5,
        got == want,
        t.elapsed(),
        Duration::from_secs(1),
        &format!("got {got:?}, want {want:?}"),
    );
}

#[test]
fn c06_c07_schedule_safety_and_alg1_monotonicity() {
    let t = Instant::now();
    let fleet = default_fleet();
    let classes = [
        WorkloadClass::Small,
        WorkloadClass::LargeMandatory,
        WorkloadClass::RandomHeterogeneous,
    ];
    let mut safety = Vec::new();
    let mut monotone = Vec::new();
    let mut runs = 0;
    for seed in 0..300u64 {
        let class = classes[(seed % 3) as usize];
        let count = 8 + (seed % 17) as usize;
        let jobs = gen_workload(&WorkloadSpec::for_class(class, count, seed)).unwrap();
        for mode in MODES {
            runs += 1;
            let config = SchedulerConfig::new(mode);
            let out = qumod_schedule_in(&jobs, &fleet, &config, &PlanContext::default()).unwrap();
            if let Err(e) = check_schedule(&out.schedule, &fleet) {
                safety.push(format!("seed {seed} {mode:?} plan: {e}"));
            }
            let im = &out.iteration_makespans;
            if !im.windows(2).all(|w| w[1] <= w[0])
                || im.len() > jobs.len() + 1
                || im.len() != out.adaptive_cuts.len() + 1
            {
                monotone.push(format!("seed {seed} {mode:?}: {im:?}"));
            }
            let sim = simulate(&jobs, &fleet, &config).unwrap();
            if let Err(e) = check_trace(&sim.trace, &fleet, config.beta_comm) {
                safety.push(format!("seed {seed} {mode:?} trace: {e}"));
            }
            if let Err(e) = check_schedule(&sim.schedule, &fleet) {
                safety.push(format!("seed {seed} {mode:?} executed: {e}"));
            }
        }
    }
    let elapsed = t.elapsed();
    let first = |v: &Vec<String>| v.first().cloned().unwrap_or_default();
    std::io::stdout()
        .write_all(
            format!(
                "criterion  7 {}: {runs} runs, {} with increasing or over-long iteration makespans {}\n",
                if monotone.is_empty() { "PASS" } else { "FAIL" },
                monotone.len(),
                first(&monotone)
            )
            .as_bytes(),
        )
        .unwrap();
    report(
        6,
        safety.is_empty() && monotone.is_empty(),
        elapsed,
        Duration::from_secs(120),
        &format!(
            "{runs} runs, {} schedule or trace violations {}",
            safety.len(),
            first(&safety)
        ),
    );
}

#[test]
fn c08_mandatory_cut_scenario() {
    let t = Instant::now();
    let fleet = default_fleet();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let circuit = gen_random_circuit(142, 50, &mut rng);
    let job = Job::flat("wide", circuit, shots_for_volume(142, 50, 1000, 1.5), 0.0);
    let mut notes = Vec::new();
    let mut ok = true;
    for mode in MODES {
        let out = qumod_schedule_in(
            std::slice::from_ref(&job),
            &fleet,
            &SchedulerConfig::new(mode),
            &PlanContext::default(),
        )
        .unwrap();
        let s = &out.schedule;
        ok &= check_schedule(s, &fleet).is_ok() && out.mandatory_cuts.len() == 1;
        let widths: BTreeSet<u32> = s.jobs().map(|j| j.width()).collect();
        match mode {
            CutMode::Lo => {
                let subs: Vec<_> = s
                    .placements
                    .iter()
                    .flat_map(|p| p.group.members.iter().map(move |m| (p, m)))
                    .collect();
                let mut concurrent = 0;
                for (i, (p, _)) in subs.iter().enumerate() {
                    for (q, _) in &subs[i + 1..] {
                        if p.device == q.device && p.start < q.finish && q.start < p.finish {
                            concurrent += 1;
                        }
                    }
                }
                ok &= subs.len() == 18 && concurrent == 0;
                notes.push(format!(
                    "LO {} sub-jobs widths {widths:?}, {concurrent} concurrent pairs on one device",
                    subs.len()
                ));
            }
            CutMode::Locc => {
                let ups: Vec<_> = s
                    .placements
                    .iter()
                    .filter(|p| p.group.members.iter().any(|m| m.stage == Stage::Upstream))
                    .collect();
                let downs: Vec<_> = s
                    .placements
                    .iter()
                    .filter(|p| p.group.members.iter().any(|m| m.stage == Stage::Downstream))
                    .collect();
                let last_up = ups.iter().map(|p| p.finish).fold(0.0, f64::max);
                let first_down = downs.iter().map(|p| p.start).fold(f64::INFINITY, f64::min);
                let devices: BTreeSet<&str> = s.placements.iter().map(|p| p.device.as_str()).collect();
                let n: usize = s.placements.iter().map(|p| p.group.members.len()).sum();
                ok &= n == 8 && first_down >= last_up && devices.len() >= 2;
                notes.push(format!(
                    "LOCC {n} sub-jobs widths {widths:?} on {} devices, upstream done {last_up:.3} s, downstream from {first_down:.3} s",
                    devices.len()
                ));
            }
        }
    }
    report(8, ok, t.elapsed(), Duration::from_secs(10), &notes.join("; "));
}

#[test]
fn c09_locc_ahead_of_lo_on_random_workloads() {
    let t = Instant::now();
    let fleet = default_fleet();
    let (mut total, mut lpst, mut changes) = (0, 0, 0);
    let mut rows = Vec::new();
    for seed in 1..=10u64 {
        let jobs = gen_workload(&WorkloadSpec::for_class(WorkloadClass::RandomHeterogeneous, 158, seed)).unwrap();
        let lo = simulate(&jobs, &fleet, &SchedulerConfig::new(CutMode::Lo))
            .unwrap()
            .metrics;
        let locc = simulate(&jobs, &fleet, &SchedulerConfig::new(CutMode::Locc))
            .unwrap()
            .metrics;
        total += usize::from(locc.t_total <= lo.t_total);
        lpst += usize::from(locc.mean_lpst >= lo.mean_lpst);
        changes += usize::from(locc.workload_changes <= lo.workload_changes);
        rows.push(format!("{:.2}/{:.2}", lo.mean_lpst, locc.mean_lpst));
    }
    report(
        9,
        total >= 8 && lpst >= 8 && changes >= 8,
        t.elapsed(),
        Duration::from_secs(300),
        &format!(
            "LOCC wins T_total {total}/10, LPST {lpst}/10, workload changes {changes}/10; LPST LO/LOCC {}",
            rows.join(" ")
        ),
    );
}

#[test]
fn c10_small_circuit_parity() {
    let t = Instant::now();
    let fleet = default_fleet();
    let mut within = 0;
    let mut gaps = Vec::new();
    for seed in 1..=10u64 {
        let jobs = gen_workload(&WorkloadSpec::for_class(WorkloadClass::Small, 50, seed)).unwrap();
        assert!(jobs.iter().all(|j| j.width() <= 40));
        let lo = simulate(&jobs, &fleet, &SchedulerConfig::new(CutMode::Lo))
            .unwrap()
            .metrics
            .makespan;
        let locc = simulate(&jobs, &fleet, &SchedulerConfig::new(CutMode::Locc))
            .unwrap()
            .metrics
            .makespan;
        let gap = (lo - locc).abs() / lo;
        within += usize::from(gap <= 0.25);
        gaps.push(format!("{gap:.3}"));
    }
    report(
        10,
        within >= 8,
        t.elapsed(),
        Duration::from_secs(120),
        &format!("{within}/10 seeds within 0.25, gaps {}", gaps.join(" ")),
    );
}

#[test]
fn c11_determinism() {
    let t = Instant::now();
    let fleet = default_fleet();
    let modes = [CutMode::Lo, CutMode::Locc];
    let overrides = Overrides::default();
    let mut differing = Vec::new();
    for class in [
        WorkloadClass::Small,
        WorkloadClass::LargeMandatory,
        WorkloadClass::RandomHeterogeneous,
    ] {
        let outputs = || {
            let jobs = run::generate(class, 40, 11).unwrap();
            let sim = run::run_simulate(&jobs, &fleet, &overrides, &modes).unwrap();
            let sched = run::run_schedule(&jobs, &fleet, &overrides, &modes).unwrap();
            let mut files = run::simulate_artifacts(&sim, &fleet);
            files.extend(run::schedule_artifacts(&sched, &fleet));
            files
        };
        let (a, b) = (outputs(), outputs());
        assert!(a.iter().any(|f| f.name == "metrics.csv") && a.iter().any(|f| f.name == "schedule-lo.json"));
        if a != b {
            differing.push(class.as_str());
        }
    }
    report(
        11,
        differing.is_empty(),
        t.elapsed(),
        Duration::from_secs(60),
        &format!("3 classes, outputs differ for {differing:?}"),
    );
}

#[test]
fn c12_assignment_optimality() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let limit = OracleLimit::default();
    let mut worst: f64 = 1.0;
    for case in 0..100 {
        let (jobs, fleet) = random_assignment_instance(&mut rng, case);
        let mut config = SchedulerConfig::new(CutMode::Lo);
        config.lambda_fidelity = 0.0;
        let schedule = generate_initial_schedule(&jobs, &fleet, &config).unwrap();
        assert!(schedule.placements.len() <= 4 && fleet.devices.len() <= 3);
        let optimum = brute_assign(&oracle_groups(&schedule, &fleet), fleet.devices.len(), &limit).unwrap();
        worst = worst.max(schedule.makespan / optimum);
    }
    report(
        12,
        worst <= 1.5,
        t.elapsed(),
        Duration::from_secs(30),
        &format!("100 instances, worst makespan ratio {worst:.4}"),
    );
}
