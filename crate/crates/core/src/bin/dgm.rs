use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use dgm::harness::{self, ExperimentSpec, RunOptions, ShootoutSpec};
use dgm::problems::catalogue;
use dgm::Error;

/// Runs discrete gradient experiments from JSON configs.
#[derive(Parser)]
#[command(name = "dgm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (method, seed) pair of an experiment.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the run seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        threads: Option<usize>,
        /// Seed of the problem instance.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare inner solvers for the implicit equation.
    Shootout {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run an experiment at several fixed time steps.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the built-in problem families.
    ListProblems,
}

const EXIT_INVALID: u8 = 2;
const EXIT_RUN_FAILURES: u8 = 3;

fn load(path: &Path, seed: Option<u64>) -> dgm::Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::load(path)?;
    if let Some(s) = seed {
        spec.problem = spec.problem.with_seed(s);
    }
    Ok(spec)
}

fn execute(cmd: Command) -> dgm::Result<ExitCode> {
    match cmd {
        Command::Run { spec, out, seeds, threads, seed } => {
            let mut spec = load(&spec, seed)?;
            if let Some(s) = seeds {
                spec.seeds = s;
                spec.validate()?;
            }
            let outcome = harness::run(&spec, &RunOptions { out, threads, dry_run: false })?;
            for m in &outcome.summary.methods {
                println!(
                    "{:<16} final rel objective {:>12.4e}  failures {}/{}",
                    m.label, m.final_mean_rel_objective, m.failed, m.runs
                );
            }
            if outcome.summary.failure_fraction > 0.1 {
                error!("{:.0}% of runs failed", 100.0 * outcome.summary.failure_fraction);
                return Ok(ExitCode::from(EXIT_RUN_FAILURES));
            }
        }
        Command::Shootout { spec, out } => {
            let spec: ShootoutSpec = serde_json::from_str(&std::fs::read_to_string(&spec)?)?;
            let out = out.unwrap_or_else(|| spec.outputs.clone());
            let dir = (!out.as_os_str().is_empty()).then_some(out.as_path());
            let rows = harness::shootout(&spec, dir)?;
            println!("{:<12} {:>8} {:<14} {:>12} {:>10}", "problem", "tol", "method", "cpu (s)", "converged");
            for r in rows {
                let cpu = if r.applicable { format!("{:.3e}", r.mean_cpu_seconds) } else { "N/A".into() };
                println!(
                    "{:<12} {:>8.0e} {:<14} {:>12} {:>9.0}%",
                    r.problem, r.tolerance, r.method, cpu, 100.0 * r.converged_fraction
                );
            }
        }
        Command::Sweep { spec, taus, out, threads, seed } => {
            let spec = load(&spec, seed)?;
            let out = out.or_else(|| (!spec.outputs.as_os_str().is_empty()).then(|| spec.outputs.clone()));
            for r in harness::tau_sweep(&spec, &taus, out.as_deref(), threads)? {
                println!(
                    "{:<16} tau {:>10.3e}  final {:>12.4e}  monotone {}",
                    r.method, r.tau, r.final_objective, r.monotone
                );
            }
        }
        Command::ListProblems => {
            for (name, description) in catalogue() {
                println!("{name:<12} {description}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e @ (Error::Config(_) | Error::Json(_))) => {
            error!("{e}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
