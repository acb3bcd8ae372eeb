use super::{
    relative_change, ImplicitSolver, InnerMethod, InnerSolveResult, InnerSolverConfig, StepSize, THETA_FLOOR,
};
use crate::discrete_gradient::{DiscreteGradientKind, Evaluator};
use crate::error::{config, Error, Result};
use crate::linalg::{dist, norm};
use crate::objective::Objective;

/// The F, R and F+R family behind the [`ImplicitSolver`] interface.
#[derive(Clone, Copy, Debug, Default)]
pub struct FixedPointSolver;

impl ImplicitSolver for FixedPointSolver {
    fn name(&self) -> &str {
        "fixed_point"
    }

    fn solve(
        &self,
        obj: &dyn Objective,
        kind: &DiscreteGradientKind,
        x: &[f64],
        tau: &StepSize,
        cfg: &InnerSolverConfig,
    ) -> Result<InnerSolveResult> {
        solve_fixed_point(obj, kind, x, tau, cfg)
    }
}

/// `T(y) = x − τ ∇̄V(x, y)`; `None` once the iteration has left the finite range.
fn apply_t(
    ev: &Evaluator,
    obj: &dyn Objective,
    x: &[f64],
    y: &[f64],
    tau: &StepSize,
) -> Result<Option<Vec<f64>>> {
    if y.iter().any(|v| !v.is_finite()) {
        return Ok(None);
    }
    let e = match ev.eval(obj, x, y) {
        Ok(e) => e,
        Err(Error::Evaluation { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(x.iter().enumerate().map(|(i, xi)| xi - tau.get(i) * e.dg[i]).collect()))
}

/// Relaxed fixed-point iteration `y ← (1−θ) y + θ T(y)` from the explicit Euler warm start.
pub fn solve_fixed_point(
    obj: &dyn Objective,
    kind: &DiscreteGradientKind,
    x: &[f64],
    tau: &StepSize,
    cfg: &InnerSolverConfig,
) -> Result<InnerSolveResult> {
    cfg.validate()?;
    if !kind.is_gradient_based() {
        return config("fixed-point solvers apply to the Gonzalez and mean value discrete gradients");
    }
    if !matches!(cfg.method, InnerMethod::F | InnerMethod::R | InnerMethod::FPlusR) {
        return config("solve_fixed_point expects method F, R or F+R");
    }
    let ev = Evaluator::new(*kind)?;
    let per_eval = match kind {
        DiscreteGradientKind::MeanValue { quadrature } => quadrature.order * quadrature.panels + 2,
        _ => 3,
    };
    let g = obj.gradient(x)?;
    let mut y: Vec<f64> = x.iter().enumerate().map(|(i, xi)| xi - tau.get(i) * g[i]).collect();
    let mut evals = 1;
    let mut theta = cfg.initial_theta(tau.max())?;
    let mut step_norms = Vec::new();
    let fail = |y: Vec<f64>, iterations, residual, evals, theta, step_norms| InnerSolveResult {
        y,
        iterations,
        converged: false,
        final_residual: residual,
        evals,
        theta,
        step_norms,
    };

    let Some(mut ty) = apply_t(&ev, obj, x, &y, tau)? else {
        return Ok(fail(y, 0, f64::INFINITY, evals, theta, step_norms));
    };
    evals += per_eval;
    let mut disc = dist(&ty, &y);
    let mut residual = f64::INFINITY;

    for k in 1..=cfg.max_iter {
        let (cand, tc, dc) = loop {
            let cand: Vec<f64> = y.iter().zip(&ty).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
            let tc = apply_t(&ev, obj, x, &cand, tau)?;
            evals += per_eval;
            let dc = tc.as_ref().map_or(f64::INFINITY, |t| dist(t, &cand));
            if cfg.method == InnerMethod::FPlusR && !(dc <= disc) {
                theta *= 0.5;
                if theta < THETA_FLOOR {
                    return Ok(fail(y, k, residual, evals, theta, step_norms));
                }
                continue;
            }
            break (cand, tc, dc);
        };
        residual = relative_change(&cand, &y);
        step_norms.push(dist(&cand, &y));
        y = cand;
        let Some(tc) = tc else {
            return Ok(fail(y, k, f64::INFINITY, evals, theta, step_norms));
        };
        ty = tc;
        disc = dc;
        if residual < cfg.tol {
            return Ok(InnerSolveResult {
                y,
                iterations: k,
                converged: true,
                final_residual: residual,
                evals,
                theta,
                step_norms,
            });
        }
        if !norm(&y).is_finite() {
            return Ok(fail(y, k, f64::INFINITY, evals, theta, step_norms));
        }
    }
    Ok(fail(y, cfg.max_iter, residual, evals, theta, step_norms))
}
