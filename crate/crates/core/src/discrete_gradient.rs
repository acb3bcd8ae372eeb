//! The Gonzalez, mean value and Itoh–Abe discrete gradients.
//!
//! A discrete gradient is a continuous map `∇̄V(x, y)` with
//! `⟨∇̄V(x, y), y − x⟩ = V(y) − V(x)` and `∇̄V(x, x) = ∇V(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, config, Result};
use crate::linalg::{self, dot, norm, sub};
use crate::objective::{Direction, DirectionKind, Objective};
use crate::quadrature::{QuadratureConfig, Rule};

/// Absolute part of the mean value tolerance.
pub const MV_ATOL: f64 = 1e-10;
/// Relative part of the mean value tolerance.
pub const MV_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscreteGradientKind {
    Gonzalez,
    MeanValue {
        #[serde(default)]
        quadrature: QuadratureConfig,
    },
    ItohAbe,
    RandomizedItohAbe {
        #[serde(default = "default_directions")]
        directions: DirectionKind,
    },
}

fn default_directions() -> DirectionKind {
    DirectionKind::UniformCoordinates
}

impl DiscreteGradientKind {
    pub fn mean_value() -> Self {
        Self::MeanValue { quadrature: QuadratureConfig::default() }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Gonzalez => "gonzalez",
            Self::MeanValue { .. } => "mean_value",
            Self::ItohAbe => "itoh_abe",
            Self::RandomizedItohAbe { directions: DirectionKind::UniformSphere } => "ria_sphere",
            Self::RandomizedItohAbe { directions: DirectionKind::CyclicCoordinates } => "ria_cyclic",
            Self::RandomizedItohAbe { .. } => "ria",
        }
    }

    /// Gonzalez and mean value need an implicit vector solve; the Itoh–Abe family is scalar.
    pub fn is_gradient_based(&self) -> bool {
        matches!(self, Self::Gonzalez | Self::MeanValue { .. })
    }
}

/// Value of a discrete gradient together with its mean value residual.
#[derive(Clone, Debug)]
pub struct DGEvaluation {
    pub dg: Vec<f64>,
    /// `V(y) − V(x)`, evaluated through a line cursor.
    pub delta_v: f64,
    /// `|⟨dg, y − x⟩ − (V(y) − V(x))|`
    pub mv_residual: f64,
    /// Objective values plus gradients consumed.
    pub evals: usize,
}

impl DGEvaluation {
    pub fn satisfies_mean_value(&self) -> bool {
        self.mv_residual <= MV_ATOL + MV_RTOL * self.delta_v.abs()
    }

    fn finish(dg: Vec<f64>, step: &[f64], delta_v: f64, evals: usize) -> Result<Self> {
        for v in &dg {
            check_finite(*v, "discrete gradient")?;
        }
        check_finite(delta_v, "objective difference")?;
        let mv_residual = (dot(&dg, step) - delta_v).abs();
        Ok(Self { dg, delta_v, mv_residual, evals })
    }
}

/// `V(y) − V(x)` through the objective's cursor, avoiding cancellation where the problem allows.
pub fn value_difference(obj: &dyn Objective, x: &[f64], step: &[f64]) -> f64 {
    let cursor = obj.cursor(x);
    let f = cursor.restrict(Direction::Vector(step));
    f(1.0)
}

fn gonzalez_degenerate(x: &[f64], step: &[f64]) -> bool {
    norm(step) <= 1e-14 * (1.0 + norm(x))
}

pub fn gonzalez_dg(obj: &dyn Objective, x: &[f64], y: &[f64]) -> Result<DGEvaluation> {
    let step = sub(y, x);
    if gonzalez_degenerate(x, &step) {
        let g = obj.gradient(x)?;
        return DGEvaluation::finish(g, &step, value_difference(obj, x, &step), 1);
    }
    let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut g = obj.gradient(&mid)?;
    let delta_v = value_difference(obj, x, &step);
    let coef = (delta_v - dot(&g, &step)) / dot(&step, &step);
    linalg::axpy(coef, &step, &mut g);
    DGEvaluation::finish(g, &step, delta_v, 3)
}

pub fn mean_value_dg(
    obj: &dyn Objective,
    x: &[f64],
    y: &[f64],
    quad: QuadratureConfig,
) -> Result<DGEvaluation> {
    let rule = Rule::new(quad)?;
    mean_value_with_rule(obj, x, y, &rule)
}

fn mean_value_with_rule(
    obj: &dyn Objective,
    x: &[f64],
    y: &[f64],
    rule: &Rule,
) -> Result<DGEvaluation> {
    let n = x.len();
    let step = sub(y, x);
    if step.iter().all(|s| *s == 0.0) {
        return DGEvaluation::finish(obj.gradient(x)?, &step, 0.0, 1);
    }
    if obj.is_quadratic() {
        let mid: Vec<f64> = x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect();
        let g = obj.gradient(&mid)?;
        return DGEvaluation::finish(g, &step, value_difference(obj, x, &step), 3);
    }
    let delta_v = value_difference(obj, x, &step);
    let mut g = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut refined;
    let mut rule = rule;
    let mut evals = 2;
    loop {
        let mut acc = vec![0.0; n];
        for (s, w) in rule.nodes.iter().zip(&rule.weights) {
            for i in 0..n {
                z[i] = x[i] + s * step[i];
            }
            obj.gradient_into(&z, &mut g)?;
            linalg::axpy(*w, &g, &mut acc);
        }
        evals += rule.len();
        let ev = DGEvaluation::finish(acc, &step, delta_v, evals)?;
        let panels = rule.cfg.panels * 2;
        if ev.satisfies_mean_value() || panels > rule.cfg.max_panels {
            return Ok(ev);
        }
        refined = Rule::new(QuadratureConfig { panels, ..rule.cfg })?;
        rule = &refined;
    }
}

/// Itoh–Abe discrete gradient from successive coordinate difference quotients.
pub fn itoh_abe_dg(obj: &dyn Objective, x: &[f64], y: &[f64]) -> Result<DGEvaluation> {
    let n = x.len();
    let step = sub(y, x);
    let mut cursor = obj.cursor(x);
    let mut dg = vec![0.0; n];
    let mut delta_v = 0.0;
    let mut evals = 1;
    for i in 0..n {
        let t = step[i];
        if t == 0.0 {
            // 0/0 branch: the partial derivative at the current mixed point.
            dg[i] = match cursor.slope(Direction::Coord(i)) {
                Some(s) => s,
                None => {
                    let h = 1e-7 * (1.0 + cursor.point()[i].abs());
                    let f = cursor.restrict(Direction::Coord(i));
                    evals += 2;
                    (f(h) - f(-h)) / (2.0 * h)
                }
            };
            evals += 1;
            continue;
        }
        let d = cursor.restrict(Direction::Coord(i))(t);
        evals += 1;
        dg[i] = d / t;
        delta_v += d;
        cursor.advance(Direction::Coord(i), t);
    }
    DGEvaluation::finish(dg, &step, delta_v, evals)
}

/// Evaluates any of the three two-point discrete gradients.
pub fn evaluate(
    kind: &DiscreteGradientKind,
    obj: &dyn Objective,
    x: &[f64],
    y: &[f64],
) -> Result<DGEvaluation> {
    match kind {
        DiscreteGradientKind::Gonzalez => gonzalez_dg(obj, x, y),
        DiscreteGradientKind::MeanValue { quadrature } => mean_value_dg(obj, x, y, *quadrature),
        DiscreteGradientKind::ItohAbe => itoh_abe_dg(obj, x, y),
        DiscreteGradientKind::RandomizedItohAbe { .. } => {
            config("the randomised Itoh–Abe method has no two-point discrete gradient")
        }
    }
}

/// Reusable evaluator that builds the quadrature rule once.
#[derive(Clone, Debug)]
pub struct Evaluator {
    kind: DiscreteGradientKind,
    rule: Option<Rule>,
}

impl Evaluator {
    pub fn new(kind: DiscreteGradientKind) -> Result<Self> {
        let rule = match kind {
            DiscreteGradientKind::MeanValue { quadrature } => Some(Rule::new(quadrature)?),
            DiscreteGradientKind::RandomizedItohAbe { .. } => {
                return config("the randomised Itoh–Abe method has no two-point discrete gradient")
            }
            _ => None,
        };
        Ok(Self { kind, rule })
    }

    pub fn kind(&self) -> &DiscreteGradientKind {
        &self.kind
    }

    pub fn eval(&self, obj: &dyn Objective, x: &[f64], y: &[f64]) -> Result<DGEvaluation> {
        match (&self.kind, &self.rule) {
            (DiscreteGradientKind::MeanValue { .. }, Some(rule)) => mean_value_with_rule(obj, x, y, rule),
            (kind, _) => evaluate(kind, obj, x, y),
        }
    }
}

/// A pair on which an axiom failed.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomFailure {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub what: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomReport {
    pub trials: usize,
    /// Largest `mv_residual / (MV_ATOL + MV_RTOL·|ΔV|)`; at most 1 when the identity holds.
    pub max_mv_excess: f64,
    /// Smallest fitted log-log slope of the consistency gap.
    pub min_consistency_slope: f64,
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Step sizes used for the consistency check.
pub const CONSISTENCY_STEPS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Minimal acceptable log-log slope of the consistency gap.
pub const CONSISTENCY_SLOPE: f64 = 0.9;

/// Fitted slope of `log gap` against `log h`, ignoring gaps at the rounding floor.
///
/// Returns `None` when fewer than two gaps lie above the floor, i.e. the
/// discrete gradient already agrees with the gradient to rounding accuracy.
pub fn consistency_slope(hs: &[f64], gaps: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(gaps)
        .filter(|(_, g)| **g > floor)
        .map(|(h, g)| (h.ln(), g.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    Some(linear_fit(&pts).0)
}

/// Least squares fit `y ≈ a x + b`; returns `(a, b, r²)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let a = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if sxx > 0.0 && syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (a, my - a * mx, r2)
}

/// Checks both axioms on random pairs `x ~ N(0, I)`, `y = x + r u`.
pub fn check_dg_axioms(
    kind: &DiscreteGradientKind,
    obj: &dyn Objective,
    trials: usize,
    seed: u64,
) -> Result<AxiomReport> {
    check_dg_axioms_around(kind, obj, &vec![0.0; obj.dim()], 1.0, trials, seed)
}

/// Like [`check_dg_axioms`], with `x ~ center + scale·N(0, I)` and `‖y − x‖ ∈ [1e-3, 1]·scale`.
pub fn check_dg_axioms_around(
    kind: &DiscreteGradientKind,
    obj: &dyn Objective,
    center: &[f64],
    scale: f64,
    trials: usize,
    seed: u64,
) -> Result<AxiomReport> {
    use rand::Rng;
    let n = obj.dim();
    let mut rng = linalg::rng(seed);
    let mut report = AxiomReport { trials, min_consistency_slope: f64::INFINITY, ..Default::default() };
    for _ in 0..trials {
        let x: Vec<f64> = linalg::gaussian_vec(&mut rng, n)
            .iter()
            .zip(center)
            .map(|(z, c)| c + scale * z)
            .collect();
        let u = linalg::unit_sphere(&mut rng, n);
        let r = scale * 10f64.powf(rng.random_range(-3.0..0.0));
        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + r * b).collect();

        let ev = evaluate(kind, obj, &x, &y)?;
        let excess = ev.mv_residual / (MV_ATOL + MV_RTOL * ev.delta_v.abs());
        report.max_mv_excess = report.max_mv_excess.max(excess);
        if excess > 1.0 {
            report.failures.push(AxiomFailure {
                x: x.clone(),
                y: y.clone(),
                what: format!("mean value residual {:e} for ΔV = {:e}", ev.mv_residual, ev.delta_v),
            });
        }

        let g = obj.gradient(&x)?;
        let d = linalg::unit_sphere(&mut rng, n);
        let mut gaps = Vec::with_capacity(CONSISTENCY_STEPS.len());
        for h in CONSISTENCY_STEPS {
            let yh: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let e = evaluate(kind, obj, &x, &yh)?;
            gaps.push(linalg::dist(&e.dg, &g));
        }
        let floor = 1e-12 * (1.0 + norm(&g) + obj.value(&x).abs());
        if let Some(slope) = consistency_slope(&CONSISTENCY_STEPS, &gaps, floor) {
            report.min_consistency_slope = report.min_consistency_slope.min(slope);
            if slope < CONSISTENCY_SLOPE {
                report.failures.push(AxiomFailure {
                    x: x.clone(),
                    y: d.iter().zip(&x).map(|(di, xi)| xi + CONSISTENCY_STEPS[0] * di).collect(),
                    what: format!("consistency gap slope {slope:.3}, gaps {gaps:?}"),
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessReport {
    /// `C_n` for the discrete gradient: √2, 1 or √n.
    pub constant: f64,
    /// Largest observed `‖∇̄V(x, y)‖ / sup ‖∇V‖`.
    pub max_ratio: f64,
    /// Sampled estimate of the gradient supremum over the thickened ball.
    pub grad_sup: f64,
}

impl BoundednessReport {
    pub fn passed(&self) -> bool {
        self.max_ratio <= self.constant * (1.0 + 1e-9)
    }
}

pub fn boundedness_constant(kind: &DiscreteGradientKind, n: usize) -> Result<f64> {
    match kind {
        DiscreteGradientKind::Gonzalez => Ok(std::f64::consts::SQRT_2),
        DiscreteGradientKind::MeanValue { .. } => Ok(1.0),
        DiscreteGradientKind::ItohAbe => Ok((n as f64).sqrt()),
        DiscreteGradientKind::RandomizedItohAbe { .. } => config("no boundedness constant for the randomised method"),
    }
}

/// Compares `‖∇̄V(x, y)‖` with `C_n · sup ‖∇V‖` for pairs in a ball.
///
/// The supremum is estimated from gradients at random points of the ball
/// thickened by its diameter (for Itoh–Abe) together with every point the
/// discrete gradient itself touches, so the estimate never undershoots the
/// values entering the pair's discrete gradient by more than the sampling
/// resolution along those segments.
pub fn check_boundedness_constant(
    kind: &DiscreteGradientKind,
    obj: &dyn Objective,
    ball_center: &[f64],
    radius: f64,
    trials: usize,
) -> Result<BoundednessReport> {
    use rand::Rng;
    let n = obj.dim();
    let constant = boundedness_constant(kind, n)?;
    let mut rng = linalg::rng(0x5eed_b0b0 ^ trials as u64);
    let thick = if matches!(kind, DiscreteGradientKind::ItohAbe) { 3.0 * radius } else { radius };
    let in_ball = |rng: &mut rand_chacha::ChaCha8Rng, r: f64| -> Vec<f64> {
        let u = linalg::unit_sphere(rng, n);
        let rho = r * rng.random::<f64>().powf(1.0 / n as f64);
        ball_center.iter().zip(&u).map(|(c, v)| c + rho * v).collect()
    };
    let mut sup = 0.0f64;
    for _ in 0..(10 * trials).max(100) {
        let z = in_ball(&mut rng, thick);
        sup = sup.max(norm(&obj.gradient(&z)?));
    }
    let mut pairs = Vec::with_capacity(trials);
    for _ in 0..trials {
        let x = in_ball(&mut rng, radius);
        let y = in_ball(&mut rng, radius);
        const SEG: usize = 33;
        for j in 0..=SEG {
            let s = j as f64 / SEG as f64;
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + s * (b - a)).collect();
            sup = sup.max(norm(&obj.gradient(&z)?));
        }
        if matches!(kind, DiscreteGradientKind::ItohAbe) {
            let mut z = x.clone();
            for i in 0..n {
                for j in 0..=8 {
                    let mut w = z.clone();
                    w[i] = x[i] + (y[i] - x[i]) * j as f64 / 8.0;
                    sup = sup.max(norm(&obj.gradient(&w)?));
                }
                z[i] = y[i];
            }
        }
        pairs.push((x, y));
    }
    let mut max_ratio = 0.0f64;
    for (x, y) in &pairs {
        let ev = evaluate(kind, obj, x, y)?;
        if sup > 0.0 {
            max_ratio = max_ratio.max(norm(&ev.dg) / sup);
        }
    }
    Ok(BoundednessReport { constant, max_ratio, grad_sup: sup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{FnObjective, Quadratic};
    use approx::assert_abs_diff_eq;

    fn half_norm_sq(n: usize) -> FnObjective {
        FnObjective::new(n, |x| 0.5 * dot(x, x), |x, g| g.copy_from_slice(x))
    }

    fn quartic() -> FnObjective {
        FnObjective::new(
            2,
            |x| x[0].powi(4) + x[0] * x[1] + 0.5 * x[1].powi(4),
            |x, g| {
                g[0] = 4.0 * x[0].powi(3) + x[1];
                g[1] = x[0] + 2.0 * x[1].powi(3);
            },
        )
    }

    #[test]
    fn gonzalez_examples() {
        let q = half_norm_sq(2);
        let e = gonzalez_dg(&q, &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(e.dg, vec![1.0, 0.0]);
        let e = gonzalez_dg(&q, &[0.0, 0.0], &[2.0, 0.0]).unwrap();
        assert_abs_diff_eq!(e.dg[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.dg[1], 0.0, epsilon = 1e-15);
        let x4 = FnObjective::new(1, |x| x[0].powi(4), |x, g| g[0] = 4.0 * x[0].powi(3));
        let e = gonzalez_dg(&x4, &[0.0], &[1.0]).unwrap();
        assert_abs_diff_eq!(e.dg[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_value_examples() {
        let q = half_norm_sq(2);
        let e = mean_value_dg(&q, &[0.0, 0.0], &[2.0, 0.0], QuadratureConfig::default()).unwrap();
        assert_abs_diff_eq!(e.dg[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.dg[1], 0.0, epsilon = 1e-14);
        let quart = quartic();
        let e = mean_value_dg(&quart, &[3.0, -1.0], &[3.0, -1.0], QuadratureConfig::default()).unwrap();
        assert_eq!(e.dg, quart.gradient(&[3.0, -1.0]).unwrap());
        // ∫₀¹ 3s² ds, checked against a fine trapezoid rule
        let cubic = FnObjective::new(1, |x| x[0].powi(3), |x, g| g[0] = 3.0 * x[0] * x[0]);
        let e = mean_value_dg(&cubic, &[0.0], &[1.0], QuadratureConfig::default()).unwrap();
        let m = 100_000;
        let trap: f64 = (0..=m)
            .map(|i| {
                let s = i as f64 / m as f64;
                let w = if i == 0 || i == m { 0.5 } else { 1.0 };
                w * 3.0 * s * s
            })
            .sum::<f64>()
            / m as f64;
        assert_abs_diff_eq!(e.dg[0], trap, epsilon = 1e-9);
        assert_abs_diff_eq!(e.dg[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn itoh_abe_examples() {
        let q = half_norm_sq(2);
        let e = itoh_abe_dg(&q, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(e.dg[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.dg[1], 0.5, epsilon = 1e-15);
        let e = itoh_abe_dg(&q, &[1.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_abs_diff_eq!(e.dg[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.dg[1], 1.0, epsilon = 1e-15);
        let e = itoh_abe_dg(&q, &[0.3, -0.2], &[0.3, -0.2]).unwrap();
        assert_eq!(e.dg, vec![0.3, -0.2]);
    }

    #[test]
    fn itoh_abe_uses_n_plus_one_values() {
        let q = half_norm_sq(5);
        let e = itoh_abe_dg(&q, &[0.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(e.evals, 6);
    }

    #[test]
    fn gonzalez_and_mean_value_agree_on_quadratics() {
        let h = vec![3.0, 1.0, 0.0, 1.0, 2.0, 0.5, 0.0, 0.5, 1.0];
        let q = Quadratic::new(3, h, vec![1.0, 0.0, -1.0]).unwrap();
        let x = [0.4, -1.2, 2.0];
        let y = [-0.3, 0.8, 1.1];
        let a = gonzalez_dg(&q, &x, &y).unwrap();
        let b = mean_value_dg(&q, &x, &y, QuadratureConfig::default()).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(a.dg[i], b.dg[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn axioms_hold_on_a_quartic() {
        for kind in [DiscreteGradientKind::Gonzalez, DiscreteGradientKind::mean_value(), DiscreteGradientKind::ItohAbe] {
            let rep = check_dg_axioms(&kind, &quartic(), 100, 7).unwrap();
            assert!(rep.passed(), "{kind:?}: {:?}", rep.failures.first());
            assert!(rep.min_consistency_slope >= CONSISTENCY_SLOPE, "{kind:?} {}", rep.min_consistency_slope);
        }
    }

    #[test]
    fn boundedness_constants_hold() {
        let q = quartic();
        for kind in [DiscreteGradientKind::Gonzalez, DiscreteGradientKind::mean_value(), DiscreteGradientKind::ItohAbe] {
            let rep = check_boundedness_constant(&kind, &q, &[0.5, -0.5], 1.0, 200).unwrap();
            assert!(rep.passed(), "{kind:?}: {rep:?}");
        }
    }

    #[test]
    fn randomized_kind_has_no_two_point_map() {
        let q = half_norm_sq(2);
        let kind = DiscreteGradientKind::RandomizedItohAbe { directions: DirectionKind::UniformSphere };
        assert!(evaluate(&kind, &q, &[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn kind_round_trips_through_json() {
        let k = DiscreteGradientKind::mean_value();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(serde_json::from_str::<DiscreteGradientKind>(&s).unwrap(), k);
        let k: DiscreteGradientKind = serde_json::from_str(r#"{"kind":"randomized_itoh_abe"}"#).unwrap();
        assert_eq!(k, DiscreteGradientKind::RandomizedItohAbe { directions: DirectionKind::UniformCoordinates });
    }
}
