use std::fs::{self, File};
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use dflm::bench::{self, BenchRecord, GridSpec};
use dflm::exec::{self, Execution};
use dflm::lm::{run_solver_from, Method, SolverConfig};
use dflm::probes::{run_probe, ProbeKind};
use dflm::{seed, suite};

#[derive(Parser)]
#[command(name = "dflm", version, about = "Derivative-free Levenberg-Marquardt benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark grids and performance profiles.
    Bench {
        #[command(subcommand)]
        action: BenchAction,
    },
    /// Monte-Carlo accuracy probes.
    Probe {
        #[command(subcommand)]
        action: ProbeAction,
    },
    /// Run one solver on one problem and write its trace.
    Solve(SolveArgs),
}

#[derive(Subcommand)]
enum BenchAction {
    /// Run a problem × solver × repetition grid and write records.csv and summary.csv.
    Run {
        /// Comma-separated problem ids, or `all`.
        #[arg(long, default_value = "all")]
        problems: String,
        #[arg(long, default_value = "fd,ossv1,ossv2")]
        solvers: String,
        #[arg(long, default_value_t = 60)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
        /// Run cells one after another instead of on the worker pool.
        #[arg(long)]
        sequential: bool,
    },
    /// Compute performance-profile curves from a records directory.
    Profile {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        tau: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProbeAction {
    Run {
        #[arg(long)]
        probe: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "ossv1")]
    solver: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplier applied to a fixed start point.
    #[arg(long, default_value_t = 1)]
    start_scale: u32,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Where to write the result JSON; stdout when omitted.
    #[arg(long)]
    result: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    tau: f64,
}

const RECORDS_FILE: &str = "records.csv";
const SUMMARY_FILE: &str = "summary.csv";
const GRID_FILE: &str = "grid.json";

fn main() -> Result<()> {
    let cli = Cli::parse();
    exec::init_thread_pool_from_env();
    match cli.command {
        Command::Bench { action } => match action {
            BenchAction::Run {
                problems,
                solvers,
                reps,
                seed,
                tau,
                out,
                sequential,
            } => bench_run(&problems, &solvers, reps, seed, tau, out, sequential),
            BenchAction::Profile { input, tau, out } => bench_profile(input, tau, out),
        },
        Command::Probe {
            action: ProbeAction::Run { probe, seed, out },
        } => probe_run(&probe, seed, out),
        Command::Solve(args) => solve(args),
    }
}

fn bench_run(
    problems: &str,
    solvers: &str,
    reps: usize,
    base_seed: u64,
    tau: f64,
    out: PathBuf,
    sequential: bool,
) -> Result<()> {
    let problems = suite::resolve_ids(problems)?;
    let methods = bench::parse_solvers(solvers)?;
    if problems.is_empty() {
        bail!("no problems selected");
    }
    let spec = GridSpec::new(reps, base_seed, tau);
    let mode = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let records = bench::run_grid(&problems, &methods, &spec, mode)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    BenchRecord::save_all(&out.join(RECORDS_FILE), &records)?;
    bench::write_summary(File::create(out.join(SUMMARY_FILE))?, &bench::summarize(&records))?;
    let grid = json!({
        "problems": problems.iter().map(|p| p.id.as_str()).collect::<Vec<_>>(),
        "solvers": methods.iter().map(|m| m.solver_id()).collect::<Vec<_>>(),
        "reps": reps,
        "seed": base_seed,
        "tau": tau,
    });
    fs::write(out.join(GRID_FILE), serde_json::to_string_pretty(&grid)?)?;
    let converged = records.iter().filter(|r| r.converged).count();
    eprintln!(
        "{} runs, {converged} converged; wrote {}",
        records.len(),
        out.join(RECORDS_FILE).display()
    );
    Ok(())
}

fn bench_profile(input: PathBuf, tau: f64, out: PathBuf) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        bail!("tau must lie in (0, 1)");
    }
    let path = if input.is_dir() { input.join(RECORDS_FILE) } else { input };
    let mut records = BenchRecord::load_all(&path).with_context(|| format!("reading {}", path.display()))?;
    bench::reassess(&mut records, tau, |id| suite::lookup(id).ok().and_then(|p| p.f_star));
    let curves = bench::performance_profile(&records)?;
    bench::write_curves(File::create(&out)?, &curves)?;
    eprintln!("{} curves; wrote {}", curves.len(), out.display());
    Ok(())
}

fn probe_run(kind: &str, seed: u64, out: PathBuf) -> Result<()> {
    let kind: ProbeKind = kind.parse()?;
    let report = run_probe(kind, seed)?;
    fs::write(&out, serde_json::to_string_pretty(&report)?)?;
    eprintln!("{kind}: {}", if report.passed { "pass" } else { "FAIL" });
    Ok(())
}

fn solve(args: SolveArgs) -> Result<()> {
    let problem = suite::lookup(&args.problem)?;
    let method: Method = args.solver.parse()?;
    let cfg = SolverConfig {
        seed: args.seed,
        ..SolverConfig::with_method(method)
    };
    let x0 = bench::start_point(&problem, args.start_scale, 0, args.seed);
    let res = run_solver_from(&problem, &x0, &cfg, &mut seed::rng(args.seed))?;
    if let Some(path) = &args.trace {
        bench::write_trace(File::create(path)?, &res.trace)?;
    }
    let result = json!({
        "problem_id": problem.id,
        "solver_id": method.solver_id(),
        "seed": args.seed,
        "start_scale": args.start_scale,
        "status": res.status.as_str(),
        "niter": res.niter,
        "nf": res.nf,
        "f_final": res.f_final,
        "f_star": problem.f_star,
        "converged": bench::converged(res.status, res.f_final, problem.f_star, args.tau),
        "norm_grad_model_final": res.norm_grad_model_final,
        "x_final": res.x_final.as_slice(),
    });
    let text = serde_json::to_string_pretty(&result)?;
    match &args.result {
        Some(path) => fs::write(path, text)?,
        None => writeln!(io::stdout(), "{text}")?,
    }
    Ok(())
}
