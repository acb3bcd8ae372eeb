use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::stats::{aggregate, AggregateRow};
use super::{method_beta, theory_curve, ExperimentSpec, Method, TheoryCurve};
use crate::dg_solvers::StepSize;
use crate::error::{config, Result};
use crate::optimizer::{Trace, TraceStatus};
use crate::problems::image::save_grayscale;
use crate::problems::Problem;
use crate::rates;

pub const TRACE_HEADER: [&str; 9] = [
    "k",
    "objective",
    "rel_objective",
    "grad_norm",
    "step_norm",
    "inner_iters",
    "cpu_seconds",
    "coord_evals",
    "dissipation",
];

const AGGREGATE_HEADER: [&str; 6] = ["k", "mean_rel_objective", "p05", "p95", "theory_bound", "runs"];

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the spec's output directory.
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses all cores.
    pub threads: Option<usize>,
    /// Skip writing files, e.g. for in-process checks.
    pub dry_run: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProblemConstants {
    pub dim: usize,
    pub kappa: Option<f64>,
    pub lipschitz: f64,
    pub mu: f64,
    pub pl_mu: f64,
    /// PŁ holds without strong convexity.
    pub pl_only: bool,
    pub l_sum: f64,
    pub l_max: f64,
    pub convex: bool,
    pub v_star: Option<f64>,
    pub initial_gap: Option<f64>,
    pub r0: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodSummary {
    pub label: String,
    pub method: Method,
    pub tau: Option<f64>,
    pub tau_star: Option<f64>,
    pub beta: Option<f64>,
    pub beta_star: Option<f64>,
    pub theory: Option<TheoryCurve>,
    pub runs: usize,
    pub failed: usize,
    pub failure_fraction: f64,
    pub failed_seeds: Vec<u64>,
    pub final_mean_rel_objective: f64,
    pub mean_cpu_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub family: String,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    pub vary_problem: bool,
    pub constants: ProblemConstants,
    pub methods: Vec<MethodSummary>,
    pub failure_fraction: f64,
}

/// One finished `(method, seed)` job.
#[derive(Debug)]
pub struct RunTrace {
    pub label: String,
    pub seed: u64,
    pub rel_objective: Vec<f64>,
    pub outcome: std::result::Result<Trace, String>,
}

impl RunTrace {
    pub fn failed(&self) -> bool {
        self.outcome.as_ref().map_or(true, Trace::failed)
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub traces: Vec<RunTrace>,
    pub aggregates: Vec<(String, Vec<AggregateRow>)>,
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Writes one trace as CSV; floats use the shortest round-trip form.
pub fn write_trace_csv(path: &Path, trace: &Trace, problem: &Problem) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        w.write_record([
            r.k.to_string(),
            fmt(r.objective),
            fmt(problem.relative_objective(r.objective)),
            fmt(r.grad_norm),
            fmt(r.step_norm),
            r.inner_iters.to_string(),
            fmt(r.cpu_seconds),
            r.coord_evals.to_string(),
            fmt(r.dissipation),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt(r.mean_rel_objective),
            fmt(r.p05),
            fmt(r.p95),
            fmt(r.theory_bound),
            r.runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn constants(problem: &Problem, r0: Option<f64>) -> ProblemConstants {
    let i = &problem.info;
    let kappa = if i.mu > 0.0 {
        Some(i.lipschitz / i.mu)
    } else if i.pl_mu > 0.0 {
        Some(i.lipschitz / i.pl_mu)
    } else {
        None
    };
    ProblemConstants {
        dim: problem.dim(),
        kappa,
        lipschitz: i.lipschitz,
        mu: i.mu,
        pl_mu: i.pl_mu,
        pl_only: i.mu == 0.0 && i.pl_mu > 0.0,
        l_sum: i.l_sum,
        l_max: i.l_max_dir,
        convex: i.convex,
        v_star: i.v_star,
        initial_gap: problem.initial_gap(),
        r0,
    }
}

/// Exact for quadratics; sampled when only the `O(1/k)` envelope applies.
fn r0_estimate(spec: &ExperimentSpec, problem: &Problem) -> Result<Option<f64>> {
    if let Some(r) = problem.r0_exact() {
        return Ok(Some(r));
    }
    let i = &problem.info;
    if i.convex && i.pl_mu == 0.0 && problem.x_star.is_some() && spec.r0_samples > 0 {
        return Ok(Some(problem.r0_sampled(spec.r0_samples, 0)?));
    }
    Ok(None)
}

/// Runs every `(method, seed)` pair of the experiment and writes traces, aggregates and `summary.json`.
pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunOutcome> {
    spec.validate()?;
    let out = opts.out.clone().unwrap_or_else(|| spec.outputs.clone());
    if !opts.dry_run && out.as_os_str().is_empty() {
        return config("no output directory given");
    }

    let shared = if spec.vary_problem { None } else { Some(spec.problem.build()?) };
    let per_seed: Vec<Problem> = if spec.vary_problem {
        spec.seeds.iter().map(|s| spec.problem.clone().with_seed(*s).build()).collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let problem_for = |si: usize| -> &Problem { shared.as_ref().unwrap_or_else(|| &per_seed[si]) };
    let reference = problem_for(0);

    // Resolve every step policy up front so configuration errors surface before any work starts.
    for m in &spec.methods {
        m.method.steps(reference)?;
    }

    let r0 = r0_estimate(spec, reference)?;
    let stop = spec.stopping_rule();
    let jobs: Vec<(usize, usize)> =
        (0..spec.methods.len()).flat_map(|mi| (0..spec.seeds.len()).map(move |si| (mi, si))).collect();

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = opts.threads {
            b = b.num_threads(t);
        }
        b.build().map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?
    };
    info!("running {} jobs for experiment {:?}", jobs.len(), spec.name);
    let traces: Vec<RunTrace> = pool.install(|| {
        jobs.par_iter()
            .map(|&(mi, si)| {
                let m = &spec.methods[mi];
                let seed = spec.seeds[si];
                let p = problem_for(si);
                let outcome = m.method.execute(p, stop, seed).map_err(|e| e.to_string());
                let rel_objective = match &outcome {
                    Ok(t) => t.records.iter().map(|r| p.relative_objective(r.objective)).collect(),
                    Err(_) => Vec::new(),
                };
                RunTrace { label: m.label(), seed, rel_objective, outcome }
            })
            .collect()
    });

    // Single collector: everything below runs on this thread.
    let mut summaries = Vec::new();
    let mut aggregates = Vec::new();
    for m in &spec.methods {
        let label = m.label();
        let runs: Vec<&RunTrace> = traces.iter().filter(|t| t.label == label).collect();
        let theory = theory_curve(&m.method, reference, r0)?;
        let good: Vec<Vec<f64>> = runs.iter().filter(|t| !t.failed()).map(|t| t.rel_objective.clone()).collect();
        let rows = aggregate(&good, |k| theory.map_or(f64::NAN, |c| c.at(k)));
        let failed_seeds: Vec<u64> = runs.iter().filter(|t| t.failed()).map(|t| t.seed).collect();
        for t in runs.iter().filter(|t| t.failed()) {
            match &t.outcome {
                Ok(tr) => warn!("{label} seed {}: {:?}", t.seed, tr.status),
                Err(e) => warn!("{label} seed {}: {e}", t.seed),
            }
        }
        let cpu: Vec<f64> = runs
            .iter()
            .filter_map(|t| t.outcome.as_ref().ok())
            .filter_map(|t| t.records.last().map(|r| r.cpu_seconds))
            .collect();
        let tau = match m.method.steps(reference)? {
            Some(StepSize::Scalar(t)) => Some(t),
            _ => None,
        };
        let (tau_star, beta_star) = match m.method.scheme() {
            Some(s) => (rates::optimal_tau(s, &reference.info).ok(), rates::optimal_beta(s, &reference.info).ok()),
            None => (None, None),
        };
        summaries.push(MethodSummary {
            label: label.clone(),
            method: m.method.clone(),
            tau,
            tau_star,
            beta: method_beta(&m.method, reference)?,
            beta_star,
            theory,
            runs: runs.len(),
            failed: failed_seeds.len(),
            failure_fraction: failed_seeds.len() as f64 / runs.len() as f64,
            failed_seeds,
            final_mean_rel_objective: rows.last().map_or(f64::NAN, |r| r.mean_rel_objective),
            mean_cpu_seconds: if cpu.is_empty() { f64::NAN } else { cpu.iter().sum::<f64>() / cpu.len() as f64 },
        });
        aggregates.push((label, rows));
    }

    let failed = traces.iter().filter(|t| t.failed()).count();
    let summary = RunSummary {
        name: spec.name.clone(),
        family: reference.family().to_string(),
        iterations: spec.iterations,
        seeds: spec.seeds.clone(),
        vary_problem: spec.vary_problem,
        constants: constants(reference, r0),
        methods: summaries,
        failure_fraction: failed as f64 / traces.len() as f64,
    };

    if !opts.dry_run {
        write_outputs(spec, &out, &summary, &traces, &aggregates, problem_for)?;
    }
    Ok(RunOutcome { summary, traces, aggregates })
}

fn write_outputs<'a>(
    spec: &ExperimentSpec,
    out: &Path,
    summary: &RunSummary,
    traces: &[RunTrace],
    aggregates: &[(String, Vec<AggregateRow>)],
    problem_for: impl Fn(usize) -> &'a Problem,
) -> Result<()> {
    fs::create_dir_all(out)?;
    for (label, rows) in aggregates {
        let dir = out.join(label);
        fs::create_dir_all(&dir)?;
        write_aggregate_csv(&dir.join("aggregate.csv"), rows)?;
    }
    for t in traces {
        if let Ok(tr) = &t.outcome {
            let si = spec.seeds.iter().position(|s| *s == t.seed).expect("seed comes from the spec");
            write_trace_csv(&out.join(&t.label).join(format!("seed_{}.csv", t.seed)), tr, problem_for(si))?;
        }
    }
    if spec.save_images {
        let p = problem_for(0);
        if let Some((rows, cols)) = p.image_shape {
            save_grayscale(&out.join("noisy.png"), rows, cols, &p.x0)?;
            if let Some(truth) = &p.truth {
                save_grayscale(&out.join("truth.png"), rows, cols, truth)?;
            }
            if let Some(xs) = &p.x_star {
                save_grayscale(&out.join("reference.png"), rows, cols, xs)?;
            }
            for t in traces.iter().filter(|t| t.seed == spec.seeds[0]) {
                if let Ok(tr) = &t.outcome {
                    save_grayscale(&out.join(&t.label).join("reconstruction.png"), rows, cols, &tr.x)?;
                }
            }
        }
    }
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(summary)?)?;
    Ok(())
}

impl RunOutcome {
    /// Statuses of all runs of one method, in seed order.
    pub fn statuses(&self, label: &str) -> Vec<Option<TraceStatus>> {
        self.traces.iter().filter(|t| t.label == label).map(|t| t.outcome.as_ref().ok().map(|t| t.status.clone())).collect()
    }
}
