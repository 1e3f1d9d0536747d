use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cutsched::error::{CliError, Result};
use cutsched::fleet_file::{load_fleet_or_default, FLEET_ENV};
use cutsched::metrics_table;
use cutsched::run::{self, ClassSel, ModeSel, Overrides};
use cutsched::trace_file::load_trace;
use cutsched::workload_file::{load_workload, save_workload};
use cutsched_core::workload::WorkloadClass;

/// Circuit-cutting-aware scheduler for multi-device quantum clouds.
#[derive(Parser)]
#[command(name = "cutsched", version, about)]
struct Cli {
    /// Run the oracle-equivalence suites and exit.
    #[arg(long)]
    self_check: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic workload file.
    GenWorkload(GenArgs),
    /// Plan a workload from time zero and write the schedule and a Gantt chart.
    Schedule(ScheduleArgs),
    /// Run the discrete-event simulation and write metrics, traces and charts.
    Simulate(SimulateArgs),
    /// Recompute metrics and charts from trace files.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    class: ClassSel,
    /// Number of jobs (class default when omitted).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Workload file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeSel,
    /// Fleet file (built-in fleet when neither this nor the environment is set).
    #[arg(long, env = FLEET_ENV)]
    fleet: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Jobs considered per scheduler invocation.
    #[arg(long)]
    window: Option<usize>,
    /// Adaptive-cut width threshold as a fraction of the largest device.
    #[arg(long)]
    theta: Option<f64>,
    /// Largest sampling overhead for an optional cut.
    #[arg(long)]
    budget: Option<u64>,
    /// Causal-span weight in the grouping cost.
    #[arg(long)]
    lambda: Option<f64>,
    /// Fidelity weight in device choice.
    #[arg(long)]
    lambda_fidelity: Option<f64>,
    /// Maximum jobs per group.
    #[arg(long)]
    cmax: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            window: self.window,
            theta: self.theta,
            budget: self.budget,
            lambda: self.lambda,
            lambda_fidelity: self.lambda_fidelity,
            cmax: self.cmax,
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    /// Workload file.
    #[arg(long)]
    workload: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SimulateArgs {
    /// Workload file; a workload is generated from --class when omitted.
    #[arg(long, conflicts_with = "class")]
    workload: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "workload")]
    class: Option<ClassSel>,
    #[arg(long, requires = "class")]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ReportArgs {
    /// Trace files written by `simulate`.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    #[arg(long, env = FLEET_ENV)]
    fleet: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn gen_workload(args: GenArgs) -> Result<()> {
    let class = WorkloadClass::from(args.class);
    let jobs = run::generate(class, args.count.unwrap_or(run::default_count(class)), args.seed)?;
    save_workload(&args.out, &jobs)?;
    println!("wrote {} jobs to {}", jobs.len(), args.out.display());
    Ok(())
}

fn schedule(args: ScheduleArgs) -> Result<()> {
    let jobs = load_workload(&args.workload)?;
    let fleet = load_fleet_or_default(args.common.fleet.as_deref())?;
    let runs = run::run_schedule(&jobs, &fleet, &args.common.overrides(), &args.common.mode.modes())?;
    let artifacts = run::schedule_artifacts(&runs, &fleet);
    for r in &runs {
        println!(
            "{}: makespan {:.3} s, {} placements, {} mandatory / {} adaptive cuts",
            r.mode.as_str(),
            r.outcome.schedule.makespan,
            r.outcome.schedule.placements.len(),
            r.outcome.mandatory_cuts.len(),
            r.outcome.adaptive_cuts.len()
        );
    }
    print_written(&run::write_artifacts(&args.common.out, &artifacts)?);
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let jobs = match (&args.workload, args.class) {
        (Some(path), _) => load_workload(path)?,
        (None, Some(c)) => {
            let class = WorkloadClass::from(c);
            run::generate(class, args.count.unwrap_or(run::default_count(class)), args.seed)?
        }
        (None, None) => return Err(CliError::Invalid("either --workload or --class is required".into())),
    };
    let fleet = load_fleet_or_default(args.common.fleet.as_deref())?;
    let runs = run::run_simulate(&jobs, &fleet, &args.common.overrides(), &args.common.mode.modes())?;
    let artifacts = run::simulate_artifacts(&runs, &fleet);
    print!("{}", metrics_table::to_text(&run::metrics_rows(&runs)));
    print_written(&run::write_artifacts(&args.common.out, &artifacts)?);
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let fleet = load_fleet_or_default(args.fleet.as_deref())?;
    let traces = args.traces.iter().map(|p| load_trace(p)).collect::<Result<Vec<_>>>()?;
    let (rows, artifacts) = run::report_artifacts(&traces, &fleet);
    print!("{}", metrics_table::to_text(&rows));
    print_written(&run::write_artifacts(&args.out, &artifacts)?);
    Ok(())
}

fn self_check() -> ExitCode {
    let reports = match cutsched_core::selfcheck::self_check() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut ok = true;
    for r in &reports {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", r.name, r.detail);
        ok &= r.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.self_check {
        return self_check();
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand or --self-check is required (see --help)");
        return ExitCode::from(cutsched::error::EXIT_VALIDATION);
    };
    let result = match command {
        Command::GenWorkload(a) => gen_workload(a),
        Command::Schedule(a) => schedule(a),
        Command::Simulate(a) => simulate(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
