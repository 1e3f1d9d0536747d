//! Runs the `cutsched` binary against temporary directories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cutsched::fleet_file::{save_fleet, FLEET_ENV};
use cutsched::workload_file::{load_workload, save_workload};
use cutsched_core::fleet::{default_fleet, Fleet};
use cutsched_core::workload::{gen_random_circuit, Job};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn cutsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutsched"))
        .args(args)
        .env_remove(FLEET_ENV)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn single_job_workload(dir: &Path, width: u32) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let job = Job::flat("only", gen_random_circuit(width, 20, &mut rng), 1000, 0.0);
    let path = dir.join("one.jsonl");
    save_workload(&path, &[job]).unwrap();
    path
}

/// (device, start, finish) of every bar in a Gantt SVG.
fn bars(svg: &str) -> Vec<(String, f64, f64)> {
    svg.lines()
        .filter(|l| l.contains("class=\"bar\""))
        .map(|l| {
            let attr = |name: &str| {
                let key = format!("{name}=\"");
                let from = l.find(&key).unwrap() + key.len();
                l[from..from + l[from..].find('"').unwrap()].to_string()
            };
            (
                attr("data-device"),
                attr("data-start").parse().unwrap(),
                attr("data-finish").parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn empty_workload_round_trips() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("w.jsonl");
    let res = cutsched(&[
        "gen-workload",
        "--class",
        "small",
        "--count",
        "0",
        "--seed",
        "1",
        "--out",
        p(&out),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(load_workload(&out).unwrap().is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn single_job_schedule_has_one_bar() {
    let dir = TempDir::new().unwrap();
    let workload = single_job_workload(dir.path(), 20);
    let res = cutsched(&[
        "schedule",
        "--workload",
        p(&workload),
        "--mode",
        "lo",
        "--out",
        p(dir.path()),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let svg = std::fs::read_to_string(dir.path().join("gantt-lo.svg")).unwrap();
    assert_eq!(bars(&svg).len(), 1);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("schedule-lo.json")).unwrap()).unwrap();
    assert_eq!(report["placements"].as_array().unwrap().len(), 1);
    assert!(!dir.path().join("gantt-locc.svg").exists());
}

#[test]
fn simulate_both_modes_writes_two_rows_and_disjoint_lanes() {
    let dir = TempDir::new().unwrap();
    let res = cutsched(&[
        "simulate",
        "--class",
        "random",
        "--count",
        "30",
        "--seed",
        "4",
        "--mode",
        "both",
        "--out",
        p(dir.path()),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "Mode,Length,T_wait,T_run,T_total,LPST,WorkloadChanges");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("LO,") && lines[2].starts_with("LOCC,"));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("WorkloadChanges"));

    for mode in ["lo", "locc"] {
        let svg = std::fs::read_to_string(dir.path().join(format!("gantt-{mode}.svg"))).unwrap();
        let mut lanes: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for (device, start, finish) in bars(&svg) {
            assert!(finish > start);
            lanes.entry(device).or_default().push((start, finish));
        }
        assert!(!lanes.is_empty());
        for spans in lanes.values_mut() {
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            assert!(
                spans.windows(2).all(|w| w[0].1 <= w[1].0),
                "{mode}: overlapping bars {spans:?}"
            );
        }
    }

    // replaying the traces reproduces the table byte for byte
    let rep = dir.path().join("rep");
    let traces = [dir.path().join("trace-lo.jsonl"), dir.path().join("trace-locc.jsonl")];
    let res = cutsched(&["report", p(&traces[0]), p(&traces[1]), "--out", p(&rep)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(std::fs::read(rep.join("metrics.csv")).unwrap(), csv.as_bytes());
}

#[test]
fn invalid_input_exits_with_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"format\":\"cutsched-workload\",\"version\":1}\n{\"id\":\"a\"}\n",
    )
    .unwrap();
    let res = cutsched(&["schedule", "--workload", p(&bad), "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("bad.jsonl:2"), "{err}");

    let good = single_job_workload(dir.path(), 10);
    let res = cutsched(&[
        "schedule",
        "--workload",
        p(&good),
        "--cmax",
        "0",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!dir.path().join("schedule-lo.json").exists());

    let res = cutsched(&["simulate", "--out", p(dir.path())]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn job_fitting_nowhere_exits_with_3() {
    let dir = TempDir::new().unwrap();
    let mut tiny = default_fleet().devices[0].clone();
    tiny.num_qubits = 1;
    let fleet_path = dir.path().join("fleet.jsonl");
    save_fleet(&fleet_path, &Fleet::new(vec![tiny]).unwrap()).unwrap();
    let workload = single_job_workload(dir.path(), 3);
    let res = cutsched(&[
        "schedule",
        "--workload",
        p(&workload),
        "--fleet",
        p(&fleet_path),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn fleet_is_read_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let mut only = default_fleet().devices[0].clone();
    only.name = "solo".into();
    only.num_qubits = 64;
    let fleet_path = dir.path().join("fleet.jsonl");
    save_fleet(&fleet_path, &Fleet::new(vec![only]).unwrap()).unwrap();
    let workload = single_job_workload(dir.path(), 20);
    let res = Command::new(env!("CARGO_BIN_EXE_cutsched"))
        .args([
            "schedule",
            "--workload",
            p(&workload),
            "--mode",
            "locc",
            "--out",
            p(dir.path()),
        ])
        .env(FLEET_ENV, &fleet_path)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let svg = std::fs::read_to_string(dir.path().join("gantt-locc.svg")).unwrap();
    assert!(bars(&svg).iter().all(|b| b.0 == "solo"));
}

#[test]
fn unwritable_output_exits_with_1() {
    let dir = TempDir::new().unwrap();
    let workload = single_job_workload(dir.path(), 10);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let res = cutsched(&["schedule", "--workload", p(&workload), "--out", p(&blocker)]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn self_check_passes() {
    let res = cutsched(&["--self-check"]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{stdout}");
}
