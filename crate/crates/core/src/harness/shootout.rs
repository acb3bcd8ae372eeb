use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::dg_solvers::{solver_for, InnerMethod, InnerSolverConfig, StepSize};
use crate::discrete_gradient::DiscreteGradientKind;
use crate::error::{config, Result};
use crate::optimizer::{inner_with_constants, TimeStepPolicy};
use crate::problems::{Problem, ProblemConfig};

fn default_scheme() -> DiscreteGradientKind {
    DiscreteGradientKind::mean_value()
}

fn default_policy() -> TimeStepPolicy {
    TimeStepPolicy::lipschitz_scaled(4.0)
}

fn default_iterations() -> usize {
    50
}

fn default_max_inner() -> usize {
    1000
}

fn default_fail_threshold() -> f64 {
    0.1
}

fn default_methods() -> Vec<ShootoutMethod> {
    [("F", InnerMethod::F), ("R", InnerMethod::R), ("F+R", InnerMethod::FPlusR), ("newton_krylov", InnerMethod::NewtonKrylov)]
        .into_iter()
        .map(|(l, m)| ShootoutMethod { label: l.to_string(), inner: InnerSolverConfig::with_method(m) })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootoutMethod {
    pub label: String,
    #[serde(default)]
    pub inner: InnerSolverConfig,
}

/// Inner-solver comparison: each method solves the implicit equation at the same outer iterates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShootoutSpec {
    #[serde(default)]
    pub name: String,
    pub problems: Vec<ProblemConfig>,
    #[serde(default = "default_scheme")]
    pub scheme: DiscreteGradientKind,
    #[serde(default = "default_policy")]
    pub policy: TimeStepPolicy,
    pub tolerances: Vec<f64>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<ShootoutMethod>,
    /// `K_max` for every inner solve.
    #[serde(default = "default_max_inner")]
    pub max_inner: usize,
    /// Fraction of failed solves above which a method counts as inapplicable.
    #[serde(default = "default_fail_threshold")]
    pub fail_threshold: f64,
    #[serde(default)]
    pub outputs: PathBuf,
}

impl ShootoutSpec {
    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() || self.tolerances.is_empty() || self.methods.is_empty() {
            return config("shootout needs problems, tolerances and methods");
        }
        if !self.scheme.is_gradient_based() {
            return config("shootout compares vector solvers; use the Gonzalez or mean value scheme");
        }
        if self.iterations == 0 || self.max_inner == 0 {
            return config("iterations and max_inner must be positive");
        }
        if self.tolerances.iter().any(|t| !(*t > 0.0)) {
            return config("tolerances must be positive");
        }
        for m in &self.methods {
            if m.inner.method == InnerMethod::ScalarRoot {
                return config("scalar root finding is not a vector solver");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShootoutRow {
    pub problem: String,
    pub tolerance: f64,
    pub method: String,
    pub mean_cpu_seconds: f64,
    pub converged_fraction: f64,
    pub applicable: bool,
    pub mean_inner_iters: f64,
}

/// Outer iterates `x⁰ … x^{K−1}` from tightly converged solves.
fn reference_path(problem: &Problem, scheme: &DiscreteGradientKind, tau: &StepSize, iters: usize) -> Result<Vec<Vec<f64>>> {
    let obj = problem.objective();
    let tight = |method| InnerSolverConfig { method, tol: 1e-13, max_iter: 20_000, ..InnerSolverConfig::default() };
    let relaxed = inner_with_constants(scheme, &tight(InnerMethod::R), Some(&problem.info));
    let r = solver_for(InnerMethod::R)?;
    let nk = solver_for(InnerMethod::NewtonKrylov)?;
    let mut path = vec![problem.x0.clone()];
    while path.len() < iters {
        let x = path.last().expect("path starts non-empty");
        let mut res = r.solve(obj, scheme, x, tau, &relaxed)?;
        if !res.converged {
            res = nk.solve(obj, scheme, x, tau, &tight(InnerMethod::NewtonKrylov))?;
        }
        if !res.converged {
            return config(format!("reference inner solve failed on {}", problem.family()));
        }
        path.push(res.y);
    }
    Ok(path)
}

/// Runs the comparison and writes `shootout.csv` when `out` is given.
pub fn shootout(spec: &ShootoutSpec, out: Option<&Path>) -> Result<Vec<ShootoutRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for pc in &spec.problems {
        let problem = pc.build()?;
        let tau = spec.policy.resolve(Some(&spec.scheme), Some(&problem.info), problem.dim())?;
        let path = reference_path(&problem, &spec.scheme, &tau, spec.iterations)?;
        info!("shootout on {}: {} reference iterates", problem.family(), path.len());
        for &tol in &spec.tolerances {
            for m in &spec.methods {
                let cfg = InnerSolverConfig { tol, max_iter: spec.max_inner, ..m.inner };
                let cfg = inner_with_constants(&spec.scheme, &cfg, Some(&problem.info));
                let solver = solver_for(cfg.method)?;
                let (mut converged, mut secs, mut iters) = (0usize, 0.0, 0usize);
                for x in &path {
                    let start = Instant::now();
                    let res = solver.solve(problem.objective(), &spec.scheme, x, &tau, &cfg);
                    secs += start.elapsed().as_secs_f64();
                    if let Ok(res) = res {
                        converged += res.converged as usize;
                        iters += res.iterations;
                    }
                }
                let total = path.len() as f64;
                let frac = converged as f64 / total;
                rows.push(ShootoutRow {
                    problem: problem.family().to_string(),
                    tolerance: tol,
                    method: m.label.clone(),
                    mean_cpu_seconds: secs / total,
                    converged_fraction: frac,
                    applicable: 1.0 - frac <= spec.fail_threshold,
                    mean_inner_iters: iters as f64 / total,
                });
            }
        }
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("shootout.csv"))?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(rows)
}
