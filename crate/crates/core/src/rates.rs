//! β-estimates, optimal time steps and the resulting convergence bounds.
//!
//! Every method satisfies `β (V(x^k) − V(x^{k+1})) ≥ ‖∇V(x^k)‖²` for the
//! method-specific `β` below. This gives `V_k − V* ≤ β R0² / (k + 2β/L)` for
//! convex coercive objectives and `V_k − V* ≤ (1 − 2μ/β)^k (V_0 − V*)` under
//! the Polyak–Łojasiewicz inequality.

use crate::discrete_gradient::DiscreteGradientKind;
use crate::error::{config, Result};
use crate::linalg;
use crate::objective::{DirectionDistribution, DirectionKind, Objective, SmoothnessInfo};

fn positive(v: f64, what: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        config(format!("{what} must be positive and finite, got {v}"))
    }
}

fn ria_constants(directions: DirectionKind, info: &SmoothnessInfo) -> Result<(f64, f64)> {
    let dist = DirectionDistribution::new(directions, info.dim())?;
    Ok((positive(info.l_max_for(&dist), "L_max")?, dist.zeta))
}

/// `β(τ)` for the given method.
pub fn beta(kind: &DiscreteGradientKind, tau: f64, info: &SmoothnessInfo) -> Result<f64> {
    let tau = positive(tau, "tau")?;
    Ok(match kind {
        DiscreteGradientKind::Gonzalez => {
            let l = positive(info.lipschitz, "L")?;
            2.0 * (1.0 / tau + l * l * tau / 2.0)
        }
        DiscreteGradientKind::MeanValue { .. } => {
            let l = positive(info.lipschitz, "L")?;
            2.0 * (1.0 / tau + l * l * tau / 4.0)
        }
        DiscreteGradientKind::ItohAbe => {
            let ls = positive(info.l_sum, "L_sum")?;
            2.0 * (1.0 / tau + ls * ls * tau)
        }
        DiscreteGradientKind::RandomizedItohAbe { directions } => {
            let (lmax, zeta) = ria_constants(*directions, info)?;
            tau * (1.0 / tau + lmax / 2.0).powi(2) / zeta
        }
    })
}

/// Time step minimising `β(τ)`.
pub fn optimal_tau(kind: &DiscreteGradientKind, info: &SmoothnessInfo) -> Result<f64> {
    Ok(match kind {
        DiscreteGradientKind::Gonzalez => std::f64::consts::SQRT_2 / positive(info.lipschitz, "L")?,
        DiscreteGradientKind::MeanValue { .. } => 2.0 / positive(info.lipschitz, "L")?,
        DiscreteGradientKind::ItohAbe => 1.0 / positive(info.l_sum, "L_sum")?,
        DiscreteGradientKind::RandomizedItohAbe { directions } => 2.0 / ria_constants(*directions, info)?.0,
    })
}

/// `β* = β(τ*)`: `2√2 L`, `2L`, `4 L̄_Σ` and `2 L_max/ζ`.
pub fn optimal_beta(kind: &DiscreteGradientKind, info: &SmoothnessInfo) -> Result<f64> {
    beta(kind, optimal_tau(kind, info)?, info)
}

/// `β R0² / (k + 2β/L)`.
pub fn sublinear_bound(k: usize, beta: f64, l: f64, r0: f64) -> f64 {
    beta * r0 * r0 / (k as f64 + 2.0 * beta / l)
}

/// Contraction factor `1 − 2μ/β` of the linear rate.
pub fn linear_factor(beta: f64, pl_mu: f64) -> Result<f64> {
    positive(beta, "beta")?;
    if pl_mu < 0.0 || 2.0 * pl_mu > beta * (1.0 + 1e-12) {
        return config(format!("linear rate needs 0 <= 2 mu <= beta (mu = {pl_mu}, beta = {beta})"));
    }
    Ok((1.0 - 2.0 * pl_mu / beta).max(0.0))
}

/// `(1 − 2μ/β)^k (V_0 − V*)`.
pub fn linear_bound(k: usize, beta: f64, pl_mu: f64, v0_gap: f64) -> Result<f64> {
    let q = linear_factor(beta, pl_mu)?;
    Ok(if k == 0 { v0_gap } else { q.powi(k as i32) * v0_gap })
}

/// β-estimate for cyclic coordinate descent with steps `τ_i = α/L_i`.
pub fn cd_beta_appendix(alpha: f64, n: usize, l: f64, l_min: f64, l_max: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return config("cd_beta_appendix needs alpha in (0, 2)");
    }
    positive(l_min, "L_min")?;
    let nf = n as f64;
    Ok(2.0 * l_max * (1.0 + nf * alpha * alpha * l * l / (l_min * l_min)) / (alpha - alpha * alpha / 2.0))
}

/// Classical cyclic coordinate descent estimate `8√n L`, for comparison.
pub fn cd_beta_classical(n: usize, l: f64) -> f64 {
    8.0 * (n as f64).sqrt() * l
}

/// Diameter `2√(2·gap/λ)` of the sublevel ellipsoid of a quadratic whose
/// smallest relevant curvature is `λ`.
pub fn ellipsoid_diameter(gap: f64, lambda_min: f64) -> f64 {
    2.0 * (2.0 * gap / lambda_min).sqrt()
}

/// Safety factor applied to sampled sublevel-set diameters.
pub const R0_SAFETY: f64 = 1.1;

/// Sampled estimate of the diameter of `{V ≤ level}` around an interior point, times [`R0_SAFETY`].
///
/// Rays `center ± t u` are followed to the level set by bisection. `project`
/// restricts the sampled directions, e.g. to the range of a singular
/// Hessian, when the sublevel set is unbounded along a known subspace.
pub fn sampled_sublevel_diameter(
    obj: &dyn Objective,
    center: &[f64],
    level: f64,
    samples: usize,
    seed: u64,
    project: Option<&dyn Fn(&mut [f64])>,
) -> Result<f64> {
    let n = obj.dim();
    let v0 = obj.value(center);
    if !(level >= v0) {
        return config("sampled diameter needs V(center) <= level");
    }
    let mut rng = linalg::rng(seed);
    let exit = |u: &[f64]| -> f64 {
        let at = |t: f64| obj.directional_value(center, u, t);
        let mut hi = 1.0;
        let mut k = 0;
        while at(hi) <= level {
            hi *= 2.0;
            k += 1;
            if k > 200 {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if at(mid) <= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };
    let mut best = 0.0f64;
    for _ in 0..samples {
        let mut u = linalg::gaussian_vec(&mut rng, n);
        if let Some(p) = project {
            p(&mut u);
        }
        let nu = linalg::norm(&u);
        if nu == 0.0 {
            continue;
        }
        u.iter_mut().for_each(|v| *v /= nu);
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        best = best.max(exit(&u) + exit(&neg));
    }
    Ok(R0_SAFETY * best)
}
