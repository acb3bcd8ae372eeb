//! Outer discrete gradient iteration, classical baselines and trace recording.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dg_solvers::{scalar_root, solver_for, InnerMethod, InnerSolverConfig, StepSize};
use crate::discrete_gradient::DiscreteGradientKind;
use crate::error::{config, Result};
use crate::linalg::{self, dist, norm};
use crate::objective::{Direction, DirectionDistribution, DirectionKind, LineCursor, Objective, SmoothnessInfo};
use crate::rates;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    Fixed { tau: f64 },
    PerCoordinate { taus: Vec<f64> },
    /// `τ = factor / L`
    LipschitzScaled { factor: f64 },
    /// `τ_i = factor / L_i`, with `L_i` the coordinate curvature constants.
    CoordinateScaled { factor: f64 },
    /// The `τ*` minimising the method's `β`.
    OptimalFromTable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeStepPolicy {
    #[serde(flatten)]
    pub kind: StepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<(f64, f64)>,
}

impl TimeStepPolicy {
    pub fn fixed(tau: f64) -> Self {
        Self { kind: StepKind::Fixed { tau }, bounds: None }
    }

    pub fn per_coordinate(taus: Vec<f64>) -> Self {
        Self { kind: StepKind::PerCoordinate { taus }, bounds: None }
    }

    pub fn coordinate_scaled(factor: f64) -> Self {
        Self { kind: StepKind::CoordinateScaled { factor }, bounds: None }
    }

    pub fn lipschitz_scaled(factor: f64) -> Self {
        Self { kind: StepKind::LipschitzScaled { factor }, bounds: None }
    }

    pub fn optimal() -> Self {
        Self { kind: StepKind::OptimalFromTable, bounds: None }
    }

    /// Concrete step sizes for a method; `kind` is only consulted by [`StepKind::OptimalFromTable`].
    pub fn resolve(
        &self,
        kind: Option<&DiscreteGradientKind>,
        info: Option<&SmoothnessInfo>,
        n: usize,
    ) -> Result<StepSize> {
        let need_info = || match info {
            Some(i) => Ok(i),
            None => config("this time-step policy needs smoothness constants"),
        };
        let steps = match &self.kind {
            StepKind::Fixed { tau } => StepSize::Scalar(*tau),
            StepKind::PerCoordinate { taus } => {
                if taus.len() != n {
                    return config(format!("expected {n} per-coordinate steps, got {}", taus.len()));
                }
                StepSize::Diagonal(taus.clone())
            }
            StepKind::LipschitzScaled { factor } => StepSize::Scalar(factor / need_info()?.lipschitz),
            StepKind::CoordinateScaled { factor } => {
                StepSize::Diagonal(need_info()?.coord_curvature.iter().map(|l| factor / l).collect())
            }
            StepKind::OptimalFromTable => match kind {
                Some(k) => StepSize::Scalar(rates::optimal_tau(k, need_info()?)?),
                None => return config("optimal time steps are defined for discrete gradient methods"),
            },
        };
        let check = |t: f64| -> Result<()> {
            if !(t > 0.0 && t.is_finite()) {
                return config(format!("time step must be positive and finite, got {t}"));
            }
            if let Some((lo, hi)) = self.bounds {
                if !(lo > 0.0 && lo <= hi) {
                    return config("time-step bounds need 0 < tau_min <= tau_max");
                }
                if t < lo || t > hi {
                    return config(format!("time step {t} outside [{lo}, {hi}]"));
                }
            }
            Ok(())
        };
        match &steps {
            StepSize::Scalar(t) => check(*t)?,
            StepSize::Diagonal(v) => v.iter().try_for_each(|t| check(*t))?,
        }
        Ok(steps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoppingRule {
    pub max_iter: usize,
    pub grad_tol: Option<f64>,
    /// Stop once `(V_k − V*)/(V_0 − V*)` drops below this; needs `V*`.
    pub rel_obj_tol: Option<f64>,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self { max_iter: 100, grad_tol: None, rel_obj_tol: None }
    }
}

impl StoppingRule {
    pub fn iterations(max_iter: usize) -> Self {
        Self { max_iter, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step_norm: f64,
    /// `Σ (x^{k+1}_i − x^k_i)²/τ_i` accumulated over the iteration.
    pub dissipation: f64,
    pub inner_iters: usize,
    /// Cumulative coordinate-equivalent evaluations: a full value or gradient counts `n`, a scalar restriction 1.
    pub coord_evals: u64,
    pub cpu_seconds: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    MaxIterations,
    Converged,
    InnerSolverFailed { k: usize },
    Diverged { k: usize },
    LineSearchFailed { k: usize },
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub records: Vec<IterateRecord>,
    pub x: Vec<f64>,
    pub status: TraceStatus,
    pub inner_solves: usize,
    pub inner_failures: usize,
}

impl Trace {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    pub fn failed(&self) -> bool {
        matches!(
            self.status,
            TraceStatus::InnerSolverFailed { .. } | TraceStatus::Diverged { .. } | TraceStatus::LineSearchFailed { .. }
        )
    }
}

/// Accumulates algorithm time only; instrumentation runs with the clock paused.
struct Recorder<'a> {
    obj: &'a dyn Objective,
    seed: u64,
    stop: StoppingRule,
    v_star: Option<f64>,
    v0: f64,
    elapsed: Duration,
    started: Option<Instant>,
    coord_evals: u64,
    records: Vec<IterateRecord>,
}

impl<'a> Recorder<'a> {
    fn new(obj: &'a dyn Objective, x0: &[f64], stop: StoppingRule, v_star: Option<f64>, seed: u64) -> Self {
        let mut r = Self {
            obj,
            seed,
            stop,
            v_star,
            v0: obj.value(x0),
            elapsed: Duration::ZERO,
            started: None,
            coord_evals: 0,
            records: Vec::new(),
        };
        r.push(x0, 0.0, 0.0, 0);
        r
    }

    fn resume(&mut self) {
        self.started = Some(Instant::now());
    }

    fn pause(&mut self) {
        if let Some(t) = self.started.take() {
            self.elapsed += t.elapsed();
        }
    }

    fn push(&mut self, x: &[f64], step_norm: f64, dissipation: f64, inner_iters: usize) -> f64 {
        let objective = self.obj.value(x);
        let grad_norm = if self.obj.has_gradient() {
            self.obj.gradient(x).map(|g| norm(&g)).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        self.records.push(IterateRecord {
            k: self.records.len(),
            objective,
            grad_norm,
            step_norm,
            dissipation,
            inner_iters,
            coord_evals: self.coord_evals,
            cpu_seconds: self.elapsed.as_secs_f64(),
            seed: self.seed,
        });
        objective
    }

    /// Records an iterate and reports whether the run should stop, and why.
    fn record(&mut self, x: &[f64], step_norm: f64, dissipation: f64, inner_iters: usize) -> Option<TraceStatus> {
        self.pause();
        let v = self.push(x, step_norm, dissipation, inner_iters);
        let k = self.records.len() - 1;
        let rec = &self.records[k];
        if !v.is_finite() || x.iter().any(|xi| !xi.is_finite()) {
            return Some(TraceStatus::Diverged { k });
        }
        if let Some(tol) = self.stop.grad_tol {
            if rec.grad_norm < tol {
                return Some(TraceStatus::Converged);
            }
        }
        if let (Some(tol), Some(vs)) = (self.stop.rel_obj_tol, self.v_star) {
            let gap0 = self.v0 - vs;
            if gap0 > 0.0 && (v - vs) / gap0 < tol {
                return Some(TraceStatus::Converged);
            }
        }
        if k >= self.stop.max_iter {
            return Some(TraceStatus::MaxIterations);
        }
        self.resume();
        None
    }

    fn finish(self, x: Vec<f64>, status: TraceStatus, inner_solves: usize, inner_failures: usize) -> Trace {
        Trace { records: self.records, x, status, inner_solves, inner_failures }
    }
}

/// Configuration of one discrete gradient run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgConfig {
    pub scheme: DiscreteGradientKind,
    pub policy: TimeStepPolicy,
    #[serde(default)]
    pub inner: InnerSolverConfig,
    #[serde(default)]
    pub stop: StoppingRule,
    #[serde(default)]
    pub seed: u64,
}

/// Fills in the discrete gradient constants that switch method R to `θ*` on convex problems.
pub fn inner_with_constants(
    scheme: &DiscreteGradientKind,
    inner: &InnerSolverConfig,
    info: Option<&SmoothnessInfo>,
) -> InnerSolverConfig {
    let mut cfg = *inner;
    if let Some(info) = info {
        if info.convex && scheme.is_gradient_based() && cfg.l_dg.is_none() && cfg.mu_dg.is_none() {
            cfg.l_dg = Some(info.lipschitz / 2.0);
            cfg.mu_dg = Some(info.mu / 2.0);
        }
    }
    cfg
}

/// Runs `x^{k+1} = x^k − τ_k ∇̄V(x^k, x^{k+1})`.
///
/// Gonzalez and mean value steps solve the implicit vector equation with the
/// configured inner solver. Itoh–Abe sweeps the coordinates in order, solving
/// one scalar equation per coordinate, and the randomised method performs `n`
/// scalar updates along sampled directions per recorded iteration.
pub fn dg_iterate(
    obj: &dyn Objective,
    info: Option<&SmoothnessInfo>,
    cfg: &DgConfig,
    x0: &[f64],
) -> Result<Trace> {
    let n = obj.dim();
    if x0.len() != n {
        return config("x0 has the wrong dimension");
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return config("x0 must be finite");
    }
    cfg.inner.validate()?;
    let tau = cfg.policy.resolve(Some(&cfg.scheme), info, n)?;
    let v_star = info.and_then(|i| i.v_star);
    match cfg.scheme {
        DiscreteGradientKind::Gonzalez | DiscreteGradientKind::MeanValue { .. } => {
            vector_dg(obj, info, cfg, &tau, x0, v_star)
        }
        DiscreteGradientKind::ItohAbe => {
            let order = DirectionKind::CyclicCoordinates;
            scalar_dg(obj, cfg, &tau, x0, v_star, order)
        }
        DiscreteGradientKind::RandomizedItohAbe { directions } => {
            if directions == DirectionKind::UniformSphere && matches!(tau, StepSize::Diagonal(_)) {
                return config("sphere directions need a scalar time step");
            }
            scalar_dg(obj, cfg, &tau, x0, v_star, directions)
        }
    }
}

fn vector_dg(
    obj: &dyn Objective,
    info: Option<&SmoothnessInfo>,
    cfg: &DgConfig,
    tau: &StepSize,
    x0: &[f64],
    v_star: Option<f64>,
) -> Result<Trace> {
    let n = obj.dim() as u64;
    if cfg.inner.method == InnerMethod::ScalarRoot {
        return config("scalar root finding applies to Itoh–Abe methods only");
    }
    let solver = solver_for(cfg.inner.method)?;
    let inner = inner_with_constants(&cfg.scheme, &cfg.inner, info);
    let mut rec = Recorder::new(obj, x0, cfg.stop, v_star, cfg.seed);
    let mut x = x0.to_vec();
    let (mut solves, mut failures) = (0, 0);
    if cfg.stop.max_iter == 0 {
        return Ok(rec.finish(x, TraceStatus::MaxIterations, 0, 0));
    }
    rec.resume();
    loop {
        let res = solver.solve(obj, &cfg.scheme, &x, tau, &inner)?;
        solves += 1;
        rec.coord_evals += res.evals as u64 * n;
        if !res.converged {
            failures += 1;
            rec.pause();
            let k = rec.records.len();
            return Ok(rec.finish(x, TraceStatus::InnerSolverFailed { k }, solves, failures));
        }
        let step: Vec<f64> = res.y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let diss = tau.dissipation(&step);
        x = res.y;
        if let Some(status) = rec.record(&x, norm(&step), diss, res.iterations) {
            return Ok(rec.finish(x, status, solves, failures));
        }
    }
}

/// One scalar Itoh–Abe update through a cursor; returns `(α, evals, failed)`.
fn scalar_update(cursor: &mut Box<dyn LineCursor + '_>, dir: Direction<'_>, tau: f64, max_iter: usize) -> (f64, usize, bool) {
    let sol = {
        let delta = cursor.restrict(dir);
        scalar_root(&*delta, cursor.slope(dir), tau, max_iter)
    };
    if sol.alpha != 0.0 {
        cursor.advance(dir, -sol.alpha);
    }
    (sol.alpha, sol.evals, sol.bracket_failed)
}

fn scalar_dg(
    obj: &dyn Objective,
    cfg: &DgConfig,
    tau: &StepSize,
    x0: &[f64],
    v_star: Option<f64>,
    directions: DirectionKind,
) -> Result<Trace> {
    let n = obj.dim();
    let mut rng = linalg::rng(cfg.seed);
    let mut rec = Recorder::new(obj, x0, cfg.stop, v_star, cfg.seed);
    let mut x = x0.to_vec();
    let (mut solves, mut failures) = (0usize, 0usize);
    let mut counter = 0usize;
    if cfg.stop.max_iter == 0 {
        return Ok(rec.finish(x, TraceStatus::MaxIterations, 0, 0));
    }
    rec.resume();
    loop {
        let mut cursor = obj.cursor(&x);
        rec.coord_evals += n as u64;
        let mut diss = 0.0;
        let mut step_sq = 0.0;
        let mut inner = 0;
        for _ in 0..n {
            let (alpha, evals, failed, t) = match directions {
                DirectionKind::CyclicCoordinates | DirectionKind::UniformCoordinates => {
                    let i = if directions == DirectionKind::CyclicCoordinates {
                        counter % n
                    } else {
                        rng.random_range(0..n)
                    };
                    let t = tau.get(i);
                    let (a, e, f) = scalar_update(&mut cursor, Direction::Coord(i), t, cfg.inner.max_iter);
                    (a, e, f, t)
                }
                DirectionKind::UniformSphere => {
                    let d = linalg::unit_sphere(&mut rng, n);
                    let t = tau.get(0);
                    let (a, e, f) = scalar_update(&mut cursor, Direction::Vector(&d), t, cfg.inner.max_iter);
                    (a, e, f, t)
                }
            };
            counter += 1;
            solves += 1;
            inner += evals;
            rec.coord_evals += evals as u64;
            if failed {
                failures += 1;
            }
            diss += alpha * alpha / t;
            step_sq += alpha * alpha;
        }
        let prev = std::mem::replace(&mut x, cursor.point().to_vec());
        drop(cursor);
        let step = if directions == DirectionKind::UniformSphere { dist(&x, &prev) } else { step_sq.sqrt() };
        if let Some(status) = rec.record(&x, step, diss, inner) {
            return Ok(rec.finish(x, status, solves, failures));
        }
    }
}

/// Explicit gradient descent `x^{k+1} = x^k − τ ∇V(x^k)`.
pub fn gradient_descent(obj: &dyn Objective, x0: &[f64], tau: f64, stop: StoppingRule, v_star: Option<f64>) -> Result<Trace> {
    if !(tau > 0.0) {
        return config("time step must be positive");
    }
    let n = obj.dim() as u64;
    let mut rec = Recorder::new(obj, x0, stop, v_star, 0);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; x.len()];
    if stop.max_iter == 0 {
        return Ok(rec.finish(x, TraceStatus::MaxIterations, 0, 0));
    }
    rec.resume();
    loop {
        obj.gradient_into(&x, &mut g)?;
        rec.coord_evals += n;
        linalg::axpy(-tau, &g, &mut x);
        let step = tau * norm(&g);
        if let Some(status) = rec.record(&x, step, step * step / tau, 1) {
            return Ok(rec.finish(x, status, 0, 0));
        }
    }
}

fn cd_loop(
    obj: &dyn Objective,
    x0: &[f64],
    taus: &StepSize,
    stop: StoppingRule,
    v_star: Option<f64>,
    seed: u64,
    mut pick: impl FnMut(&mut rand_chacha::ChaCha8Rng, usize) -> CdDirection,
) -> Result<Trace> {
    if !obj.has_gradient() {
        return Err(crate::Error::GradientUnavailable);
    }
    let n = obj.dim();
    let mut rng = linalg::rng(seed);
    let mut rec = Recorder::new(obj, x0, stop, v_star, seed);
    let mut x = x0.to_vec();
    let mut counter = 0usize;
    if stop.max_iter == 0 {
        return Ok(rec.finish(x, TraceStatus::MaxIterations, 0, 0));
    }
    rec.resume();
    loop {
        let mut cursor = obj.cursor(&x);
        let mut diss = 0.0;
        for _ in 0..n {
            let d = pick(&mut rng, counter);
            counter += 1;
            let (dir, t) = match &d {
                CdDirection::Coord(i) => (Direction::Coord(*i), taus.get(*i)),
                CdDirection::Vector(v) => (Direction::Vector(v), taus.get(0)),
            };
            let s = cursor.slope(dir).ok_or(crate::Error::GradientUnavailable)?;
            rec.coord_evals += 1;
            if s != 0.0 {
                cursor.advance(dir, -t * s);
            }
            diss += t * s * s;
        }
        let prev = std::mem::replace(&mut x, cursor.point().to_vec());
        drop(cursor);
        let step = dist(&x, &prev);
        if let Some(status) = rec.record(&x, step, diss, 1) {
            return Ok(rec.finish(x, status, 0, 0));
        }
    }
}

enum CdDirection {
    Coord(usize),
    Vector(Vec<f64>),
}

/// Cyclic coordinate descent `x_i ← x_i − τ_i ∂_i V(x)`; one recorded iteration is a full sweep.
pub fn cyclic_cd(obj: &dyn Objective, x0: &[f64], taus: &StepSize, stop: StoppingRule, v_star: Option<f64>) -> Result<Trace> {
    let n = obj.dim();
    cd_loop(obj, x0, taus, stop, v_star, 0, |_, c| CdDirection::Coord(c % n))
}

/// Randomised coordinate (or random pursuit) descent; `n` updates per recorded iteration.
pub fn randomized_cd(
    obj: &dyn Objective,
    x0: &[f64],
    taus: &StepSize,
    dist: DirectionDistribution,
    seed: u64,
    stop: StoppingRule,
    v_star: Option<f64>,
) -> Result<Trace> {
    let n = obj.dim();
    if dist.kind == DirectionKind::UniformSphere && matches!(taus, StepSize::Diagonal(_)) {
        return config("sphere directions need a scalar time step");
    }
    cd_loop(obj, x0, taus, stop, v_star, seed, move |rng, c| match dist.kind {
        DirectionKind::CyclicCoordinates => CdDirection::Coord(c % n),
        DirectionKind::UniformCoordinates => CdDirection::Coord(rng.random_range(0..n)),
        DirectionKind::UniformSphere => CdDirection::Vector(linalg::unit_sphere(rng, n)),
    })
}

/// Backtracking parameters for [`armijo_line_search`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArmijoConfig {
    pub c1: f64,
    pub shrink: f64,
    pub initial_step: f64,
    pub min_step: f64,
}

impl Default for ArmijoConfig {
    fn default() -> Self {
        Self { c1: 1e-4, shrink: 0.5, initial_step: 1.0, min_step: 1e-20 }
    }
}

/// Gradient descent with backtracking until `V(x − t g) ≤ V(x) − c1 t ‖g‖²`.
pub fn armijo_line_search(
    obj: &dyn Objective,
    x0: &[f64],
    ls: ArmijoConfig,
    stop: StoppingRule,
    v_star: Option<f64>,
) -> Result<Trace> {
    if !(ls.c1 > 0.0 && ls.c1 < 1.0 && ls.shrink > 0.0 && ls.shrink < 1.0 && ls.initial_step > 0.0) {
        return config("Armijo needs c1, shrink in (0, 1) and a positive initial step");
    }
    let n = obj.dim() as u64;
    let mut rec = Recorder::new(obj, x0, stop, v_star, 0);
    let mut x = x0.to_vec();
    let mut g = vec![0.0; x.len()];
    if stop.max_iter == 0 {
        return Ok(rec.finish(x, TraceStatus::MaxIterations, 0, 0));
    }
    rec.resume();
    loop {
        obj.gradient_into(&x, &mut g)?;
        let fx = obj.value(&x);
        rec.coord_evals += 2 * n;
        let gg = linalg::dot(&g, &g);
        if gg == 0.0 {
            rec.pause();
            return Ok(rec.finish(x, TraceStatus::Converged, 0, 0));
        }
        let mut t = ls.initial_step;
        let mut tries = 0;
        loop {
            let trial = obj.directional_value(&x, &g, -t);
            rec.coord_evals += n;
            tries += 1;
            if trial <= fx - ls.c1 * t * gg {
                break;
            }
            t *= ls.shrink;
            if t < ls.min_step {
                rec.pause();
                let k = rec.records.len();
                return Ok(rec.finish(x, TraceStatus::LineSearchFailed { k }, 0, 0));
            }
        }
        linalg::axpy(-t, &g, &mut x);
        let step = t * gg.sqrt();
        if let Some(status) = rec.record(&x, step, step * step / t, tries) {
            return Ok(rec.finish(x, status, 0, 0));
        }
    }
}
