//! Experiment specifications, method dispatch and reproducible multi-seed runs.

mod run;
mod shootout;
mod stats;
mod sweep;

use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dg_solvers::{InnerSolverConfig, StepSize};
use crate::discrete_gradient::DiscreteGradientKind;
use crate::error::{config, Error, Result};
use crate::objective::{DirectionDistribution, DirectionKind};
use crate::optimizer::{self, ArmijoConfig, DgConfig, StepKind, StoppingRule, TimeStepPolicy, Trace};
use crate::problems::{Problem, ProblemConfig};
use crate::rates;

pub use run::{run, write_trace_csv, MethodSummary, ProblemConstants, RunOptions, RunOutcome, RunSummary, RunTrace, TRACE_HEADER};
pub use shootout::{shootout, ShootoutMethod, ShootoutRow, ShootoutSpec};
pub use stats::{aggregate, percentile, AggregateRow};
pub use sweep::{tau_sweep, SweepRow};

fn uniform_coordinates() -> DirectionKind {
    DirectionKind::UniformCoordinates
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    DiscreteGradient {
        scheme: DiscreteGradientKind,
        policy: TimeStepPolicy,
        #[serde(default)]
        inner: InnerSolverConfig,
    },
    GradientDescent {
        policy: TimeStepPolicy,
    },
    CyclicCd {
        policy: TimeStepPolicy,
    },
    RandomizedCd {
        #[serde(default = "uniform_coordinates")]
        directions: DirectionKind,
        policy: TimeStepPolicy,
    },
    Armijo {
        #[serde(default)]
        line_search: ArmijoConfig,
    },
}

impl Method {
    pub fn default_label(&self) -> String {
        match self {
            Method::DiscreteGradient { scheme, .. } => scheme.label().to_string(),
            Method::GradientDescent { .. } => "gd".into(),
            Method::CyclicCd { .. } => "cyclic_cd".into(),
            Method::RandomizedCd { .. } => "randomized_cd".into(),
            Method::Armijo { .. } => "armijo".into(),
        }
    }

    pub fn policy(&self) -> Option<&TimeStepPolicy> {
        match self {
            Method::DiscreteGradient { policy, .. }
            | Method::GradientDescent { policy }
            | Method::CyclicCd { policy }
            | Method::RandomizedCd { policy, .. } => Some(policy),
            Method::Armijo { .. } => None,
        }
    }

    pub fn policy_mut(&mut self) -> Option<&mut TimeStepPolicy> {
        match self {
            Method::DiscreteGradient { policy, .. }
            | Method::GradientDescent { policy }
            | Method::CyclicCd { policy }
            | Method::RandomizedCd { policy, .. } => Some(policy),
            Method::Armijo { .. } => None,
        }
    }

    pub fn scheme(&self) -> Option<&DiscreteGradientKind> {
        match self {
            Method::DiscreteGradient { scheme, .. } => Some(scheme),
            _ => None,
        }
    }

    /// Whether the run draws random directions, so that seeds matter.
    pub fn is_randomized(&self) -> bool {
        matches!(
            self,
            Method::RandomizedCd { .. }
                | Method::DiscreteGradient { scheme: DiscreteGradientKind::RandomizedItohAbe { .. }, .. }
        )
    }

    /// Concrete time steps on a problem.
    pub fn steps(&self, problem: &Problem) -> Result<Option<StepSize>> {
        match self.policy() {
            Some(p) => Ok(Some(p.resolve(self.scheme(), Some(&problem.info), problem.dim())?)),
            None => Ok(None),
        }
    }

    /// Runs the method from the problem's starting point.
    pub fn execute(&self, problem: &Problem, stop: StoppingRule, seed: u64) -> Result<Trace> {
        let obj = problem.objective();
        let x0 = &problem.x0;
        let info = &problem.info;
        let v_star = problem.v_star();
        match self {
            Method::DiscreteGradient { scheme, policy, inner } => {
                let cfg = DgConfig { scheme: *scheme, policy: policy.clone(), inner: *inner, stop, seed };
                optimizer::dg_iterate(obj, Some(info), &cfg, x0)
            }
            Method::GradientDescent { policy } => match policy.resolve(None, Some(info), problem.dim())? {
                StepSize::Scalar(t) => optimizer::gradient_descent(obj, x0, t, stop, v_star),
                StepSize::Diagonal(_) => config("gradient descent needs a scalar time step"),
            },
            Method::CyclicCd { policy } => {
                let taus = policy.resolve(None, Some(info), problem.dim())?;
                optimizer::cyclic_cd(obj, x0, &taus, stop, v_star)
            }
            Method::RandomizedCd { directions, policy } => {
                let taus = policy.resolve(None, Some(info), problem.dim())?;
                let dist = DirectionDistribution::new(*directions, problem.dim())?;
                optimizer::randomized_cd(obj, x0, &taus, dist, seed, stop, v_star)
            }
            Method::Armijo { line_search } => optimizer::armijo_line_search(obj, x0, *line_search, stop, v_star),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub method: Method,
}

impl MethodSpec {
    pub fn new(method: Method) -> Self {
        Self { label: None, method }
    }

    pub fn labelled(label: &str, method: Method) -> Self {
        Self { label: Some(label.to_string()), method }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.method.default_label())
    }
}

fn default_r0_samples() -> usize {
    200
}

/// A complete experiment: one problem, several methods and a list of seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    pub problem: ProblemConfig,
    pub methods: Vec<MethodSpec>,
    pub iterations: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub outputs: PathBuf,
    /// Rebuild the problem from each run seed instead of sharing one instance.
    #[serde(default)]
    pub vary_problem: bool,
    #[serde(default)]
    pub grad_tol: Option<f64>,
    #[serde(default)]
    pub rel_obj_tol: Option<f64>,
    /// Directions sampled for the sublevel-set diameter when no exact value exists.
    #[serde(default = "default_r0_samples")]
    pub r0_samples: usize,
    /// Write reconstructions of image problems.
    #[serde(default)]
    pub save_images: bool,
}

impl ExperimentSpec {
    pub fn new(problem: ProblemConfig, methods: Vec<MethodSpec>, iterations: usize, seeds: Vec<u64>) -> Self {
        Self {
            name: String::new(),
            problem,
            methods,
            iterations,
            seeds,
            outputs: PathBuf::new(),
            vary_problem: false,
            grad_tol: None,
            rel_obj_tol: None,
            r0_samples: default_r0_samples(),
            save_images: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return config("experiment needs at least one method");
        }
        if self.seeds.is_empty() {
            return config("experiment needs at least one seed");
        }
        if self.iterations == 0 {
            return config("iterations must be positive");
        }
        let mut seen = HashSet::new();
        for m in &self.methods {
            let label = m.label();
            if label.is_empty() || label.contains(['/', '\\']) {
                return config(format!("invalid method label {label:?}"));
            }
            if !seen.insert(label.clone()) {
                return config(format!("duplicate method label {label:?}; set distinct labels"));
            }
            if let Method::DiscreteGradient { inner, .. } = &m.method {
                inner.validate()?;
            }
        }
        let mut uniq = self.seeds.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != self.seeds.len() {
            return config("seeds must be distinct");
        }
        Ok(())
    }

    pub fn stopping_rule(&self) -> StoppingRule {
        StoppingRule { max_iter: self.iterations, grad_tol: self.grad_tol, rel_obj_tol: self.rel_obj_tol }
    }
}

/// Theoretical envelope of the relative objective `(V_k − V*)/(V_0 − V*)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum TheoryCurve {
    /// `q^{k·updates}`
    Linear { factor: f64, updates_per_iteration: usize },
    /// `β R0² / (k + 2β/L) / gap`
    Sublinear { beta: f64, lipschitz: f64, r0: f64, gap: f64 },
}

impl TheoryCurve {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            TheoryCurve::Linear { factor, updates_per_iteration } => factor.powf((k * updates_per_iteration) as f64),
            TheoryCurve::Sublinear { beta, lipschitz, r0, gap } => {
                rates::sublinear_bound(k, beta, lipschitz, r0) / gap
            }
        }
    }
}

/// `β` for the method at its configured steps, when the theory covers it.
pub fn method_beta(method: &Method, problem: &Problem) -> Result<Option<f64>> {
    let info = &problem.info;
    let n = problem.dim();
    match method {
        Method::DiscreteGradient { scheme, .. } => match method.steps(problem)? {
            Some(StepSize::Scalar(tau)) => Ok(Some(rates::beta(scheme, tau, info)?)),
            _ => Ok(None),
        },
        Method::CyclicCd { policy } => match policy.kind {
            StepKind::CoordinateScaled { factor } if factor > 0.0 && factor < 2.0 => {
                let lmin = info.coord_curvature.iter().cloned().fold(f64::INFINITY, f64::min);
                let lmax = info.l_max_dir;
                Ok(Some(rates::cd_beta_appendix(factor, n, info.lipschitz, lmin, lmax)?))
            }
            _ => Ok(None),
        },
        _ => Ok(None),
    }
}

/// The linear (PŁ) envelope when available, otherwise the `O(1/k)` envelope for convex problems.
pub fn theory_curve(method: &Method, problem: &Problem, r0: Option<f64>) -> Result<Option<TheoryCurve>> {
    let Some(beta) = method_beta(method, problem)? else {
        return Ok(None);
    };
    let info = &problem.info;
    let Some(gap) = problem.initial_gap().filter(|g| *g > 0.0) else {
        return Ok(None);
    };
    let updates = if method.is_randomized() { problem.dim() } else { 1 };
    if info.pl_mu > 0.0 && 2.0 * info.pl_mu <= beta {
        return Ok(Some(TheoryCurve::Linear { factor: rates::linear_factor(beta, info.pl_mu)?, updates_per_iteration: updates }));
    }
    match r0 {
        Some(r0) if info.convex && !method.is_randomized() => {
            Ok(Some(TheoryCurve::Sublinear { beta, lipschitz: info.lipschitz, r0, gap }))
        }
        _ => Ok(None),
    }
}

/// Replaces a method's time-step policy with a fixed scalar step.
pub fn with_fixed_step(method: &Method, tau: f64) -> Result<Method> {
    let mut m = method.clone();
    match m.policy_mut() {
        Some(p) => {
            *p = TimeStepPolicy::fixed(tau);
            Ok(m)
        }
        None => Err(Error::Config(format!("{} has no time step", method.default_label()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::LinearConfig;

    fn spec() -> ExperimentSpec {
        ExperimentSpec::new(
            ProblemConfig::Linear(LinearConfig { n: 10, m: 10, kappa: 10.0, ..Default::default() }),
            vec![
                MethodSpec::new(Method::DiscreteGradient {
                    scheme: DiscreteGradientKind::mean_value(),
                    policy: TimeStepPolicy::lipschitz_scaled(2.0),
                    inner: InnerSolverConfig::default(),
                }),
                MethodSpec::new(Method::Armijo { line_search: ArmijoConfig::default() }),
            ],
            5,
            vec![1, 2],
        )
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = spec();
        let text = serde_json::to_string_pretty(&s).unwrap();
        assert_eq!(ExperimentSpec::from_json(&text).unwrap(), s);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut s = spec();
        s.methods.clear();
        assert!(s.validate().is_err());
        let mut s = spec();
        s.seeds.clear();
        assert!(s.validate().is_err());
        let mut s = spec();
        s.methods.push(s.methods[0].clone());
        assert!(s.validate().is_err());
    }

    #[test]
    fn parses_hand_written_config() {
        let text = r#"{
            "problem": {"family": "quadratic", "n": 4, "kappa": 2.0},
            "methods": [
                {"method": "discrete_gradient", "scheme": {"kind": "itoh_abe"}, "policy": {"kind": "coordinate_scaled", "factor": 2.0}},
                {"method": "randomized_cd", "policy": {"kind": "fixed", "tau": 0.5}, "label": "rcd"}
            ],
            "iterations": 3,
            "seeds": [0]
        }"#;
        let s = ExperimentSpec::from_json(text).unwrap();
        assert_eq!(s.methods[1].label(), "rcd");
        assert_eq!(s.methods[0].label(), "itoh_abe");
    }
}
