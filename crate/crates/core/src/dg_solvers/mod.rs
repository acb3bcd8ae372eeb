//! Solvers for the implicit equation `y = x − τ ∇̄V(x, y)`.

mod fixed_point;
mod newton_krylov;
mod scalar;

pub use fixed_point::{solve_fixed_point, FixedPointSolver};
pub use newton_krylov::NewtonKrylov;
pub use scalar::{scalar_root, solve_itoh_abe_scalar, ScalarSolve, ScalarStep};

use serde::{Deserialize, Serialize};

use crate::discrete_gradient::DiscreteGradientKind;
use crate::error::{config, Result};
use crate::objective::Objective;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerMethod {
    /// Plain fixed-point iteration, `θ = 1`.
    F,
    /// Relaxed fixed-point iteration.
    R,
    /// Starts at `θ = 1` and halves `θ` whenever the discrepancy grows.
    FPlusR,
    /// Bracketed scalar root finding (Itoh–Abe family only).
    ScalarRoot,
    /// Jacobian-free Newton–Krylov, the built-in stand-in for an external solver.
    NewtonKrylov,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InnerSolverConfig {
    pub method: InnerMethod,
    /// Relaxation for method R when the discrete gradient constants are unknown.
    pub theta: f64,
    /// Tolerance on the componentwise relative change between inner iterates.
    pub tol: f64,
    pub max_iter: usize,
    /// `L_DG`; with `mu_dg` it switches method R to the optimal `θ*`.
    pub l_dg: Option<f64>,
    pub mu_dg: Option<f64>,
}

impl Default for InnerSolverConfig {
    fn default() -> Self {
        Self { method: InnerMethod::R, theta: 0.5, tol: 1e-10, max_iter: 1000, l_dg: None, mu_dg: None }
    }
}

impl InnerSolverConfig {
    pub fn with_method(method: InnerMethod) -> Self {
        Self { method, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return config(format!("theta must lie in (0, 1], got {}", self.theta));
        }
        if !(self.tol > 0.0) {
            return config("inner tolerance must be positive");
        }
        if self.max_iter == 0 {
            return config("inner max_iter must be positive");
        }
        Ok(())
    }

    /// Initial relaxation for the configured method at step `tau`.
    pub fn initial_theta(&self, tau: f64) -> Result<f64> {
        match self.method {
            InnerMethod::F | InnerMethod::FPlusR => Ok(1.0),
            InnerMethod::R => match (self.l_dg, self.mu_dg) {
                (Some(l), Some(mu)) => theta_star(tau, l, mu),
                _ => Ok(self.theta),
            },
            _ => Ok(self.theta),
        }
    }
}

/// Smallest relaxation F+R may reach before reporting failure.
pub const THETA_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;

/// Minimiser of the contraction factor, `(1 + τμ)/(1 + τ²L² + 2τμ)`.
pub fn theta_star(tau: f64, l_dg: f64, mu_dg: f64) -> Result<f64> {
    if !(l_dg > 0.0) {
        return config("theta_star needs L_DG > 0");
    }
    if !(tau > 0.0) || mu_dg < 0.0 || mu_dg > l_dg * (1.0 + 1e-12) {
        return config("theta_star needs tau > 0 and 0 <= mu_DG <= L_DG");
    }
    Ok((1.0 + tau * mu_dg) / (1.0 + tau * tau * l_dg * l_dg + 2.0 * tau * mu_dg))
}

/// `ω(θ) = (1−θ)² + τ²θ²L² − 2τ(1−θ)θμ`, the squared contraction factor of the relaxed iteration.
pub fn contraction_factor(theta: f64, tau: f64, l_dg: f64, mu_dg: f64) -> f64 {
    (1.0 - theta).powi(2) + tau * tau * theta * theta * l_dg * l_dg - 2.0 * tau * (1.0 - theta) * theta * mu_dg
}

/// Per-coordinate or uniform time step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepSize {
    Scalar(f64),
    Diagonal(Vec<f64>),
}

impl StepSize {
    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        match self {
            StepSize::Scalar(t) => *t,
            StepSize::Diagonal(v) => v[i],
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            StepSize::Scalar(t) => *t,
            StepSize::Diagonal(v) => v.iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn scaled(&self, factor: f64) -> StepSize {
        match self {
            StepSize::Scalar(t) => StepSize::Scalar(t * factor),
            StepSize::Diagonal(v) => StepSize::Diagonal(v.iter().map(|t| t * factor).collect()),
        }
    }

    /// `Σ (y_i − x_i)²/τ_i`, the dissipated energy of a step.
    pub fn dissipation(&self, step: &[f64]) -> f64 {
        step.iter().enumerate().map(|(i, s)| s * s / self.get(i)).sum()
    }
}

/// Outcome of one implicit vector solve.
#[derive(Clone, Debug)]
pub struct InnerSolveResult {
    pub y: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖r‖∞` of the componentwise relative change at exit.
    pub final_residual: f64,
    /// Objective values plus gradients consumed.
    pub evals: usize,
    /// Relaxation in force at exit.
    pub theta: f64,
    /// `‖y^k − y^{k−1}‖` for every accepted inner step.
    pub step_norms: Vec<f64>,
}

/// Pluggable solver for the implicit vector equation of the Gonzalez and mean value methods.
pub trait ImplicitSolver: Send + Sync {
    fn name(&self) -> &str;

    fn solve(
        &self,
        obj: &dyn Objective,
        kind: &DiscreteGradientKind,
        x: &[f64],
        tau: &StepSize,
        cfg: &InnerSolverConfig,
    ) -> Result<InnerSolveResult>;
}

/// Solver for a configured vector method.
pub fn solver_for(method: InnerMethod) -> Result<Box<dyn ImplicitSolver>> {
    match method {
        InnerMethod::F | InnerMethod::R | InnerMethod::FPlusR => Ok(Box::new(FixedPointSolver)),
        InnerMethod::NewtonKrylov => Ok(Box::new(NewtonKrylov::default())),
        InnerMethod::ScalarRoot => config("scalar root finding applies to Itoh–Abe methods only"),
    }
}

/// `‖r‖∞` with `r_i = (y_i − p_i)/p_i`, or `y_i` where `p_i = 0`.
///
/// Changes within a few ulps of `‖p‖∞` are rounding noise and count as zero.
pub fn relative_change(y: &[f64], prev: &[f64]) -> f64 {
    let noise = 8.0 * f64::EPSILON * prev.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    y.iter()
        .zip(prev)
        .map(|(a, p)| {
            if (a - p).abs() <= noise {
                0.0
            } else if *p != 0.0 {
                ((a - p) / p).abs()
            } else {
                a.abs()
            }
        })
        .fold(0.0, f64::max)
}
