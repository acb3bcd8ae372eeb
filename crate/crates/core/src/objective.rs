//! Objective functions, smoothness metadata and direction distributions.
//!
//! Every optimiser in the crate talks to a problem through the [`Objective`]
//! trait. Besides value and gradient, an objective hands out a [`LineCursor`]:
//! a stateful view anchored at a point that evaluates one-dimensional
//! restrictions `t ↦ V(x + t d) − V(x)` cheaply. Coordinate and scalar
//! discrete gradient steps only ever need those restrictions, so problems with
//! exploitable structure (least squares, logistic loss, local image stencils)
//! override the cursor and never materialise a full gradient.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, config, Error, Result};
use crate::linalg::{self, dot, norm};

/// A direction along which an objective is restricted.
#[derive(Clone, Copy, Debug)]
pub enum Direction<'a> {
    /// The standard basis vector `e_i`.
    Coord(usize),
    /// An arbitrary (usually unit) vector.
    Vector(&'a [f64]),
}

impl Direction<'_> {
    /// Writes `x + t d` into `x`.
    pub fn step(&self, x: &mut [f64], t: f64) {
        match *self {
            Direction::Coord(i) => x[i] += t,
            Direction::Vector(d) => linalg::axpy(t, d, x),
        }
    }

    pub fn dot(&self, g: &[f64]) -> f64 {
        match *self {
            Direction::Coord(i) => g[i],
            Direction::Vector(d) => dot(g, d),
        }
    }
}

/// Scalar restriction `t ↦ V(x + t d) − V(x)` handed out by a cursor.
pub type Restriction<'s> = Box<dyn Fn(f64) -> f64 + 's>;

/// Stateful evaluation point used by coordinate and scalar discrete gradient steps.
pub trait LineCursor {
    /// Current point.
    fn point(&self) -> &[f64];

    /// Restriction `t ↦ V(x + t d) − V(x)` of the objective through the current point.
    fn restrict<'s>(&'s self, dir: Direction<'s>) -> Restriction<'s>;

    /// Directional derivative `⟨∇V(x), d⟩`, or `None` for derivative-free objectives.
    fn slope(&self, dir: Direction<'_>) -> Option<f64>;

    /// Moves the cursor to `x + t d`.
    fn advance(&mut self, dir: Direction<'_>, t: f64);
}

/// Upcast helper so default trait methods can hand out `&dyn Objective`.
pub trait AsObjective {
    fn as_objective(&self) -> &dyn Objective;
}

impl<T: Objective> AsObjective for T {
    fn as_objective(&self) -> &dyn Objective {
        self
    }
}

/// A continuously differentiable function `V: ℝⁿ → ℝ`.
pub trait Objective: AsObjective + Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Whether [`Objective::gradient_into`] is implemented.
    fn has_gradient(&self) -> bool {
        true
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g)?;
        Ok(g)
    }

    /// Whether `V` is quadratic, so that the mean value discrete gradient is the midpoint gradient.
    fn is_quadratic(&self) -> bool {
        false
    }

    /// Partial derivative `∂_i V(x)`.
    fn partial(&self, i: usize, x: &[f64]) -> Result<f64> {
        Ok(self.gradient(x)?[i])
    }

    /// `V(x + α d)`.
    fn directional_value(&self, x: &[f64], d: &[f64], alpha: f64) -> f64 {
        let y: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        self.value(&y)
    }

    /// Cursor anchored at `x`. The default evaluates restrictions through
    /// [`Objective::value`]; structured problems override it.
    fn cursor(&self, x: &[f64]) -> Box<dyn LineCursor + '_> {
        Box::new(GenericCursor::new(self.as_objective(), x))
    }
}

/// Cursor that evaluates every restriction with full objective evaluations.
pub struct GenericCursor<'a> {
    obj: &'a dyn Objective,
    x: Vec<f64>,
    fx: f64,
}

impl<'a> GenericCursor<'a> {
    pub fn new(obj: &'a dyn Objective, x: &[f64]) -> Self {
        let fx = obj.value(x);
        Self { obj, x: x.to_vec(), fx }
    }
}

impl LineCursor for GenericCursor<'_> {
    fn point(&self) -> &[f64] {
        &self.x
    }

    fn restrict<'s>(&'s self, dir: Direction<'s>) -> Restriction<'s> {
        match dir {
            Direction::Coord(i) => Box::new(move |t| {
                if t == 0.0 {
                    return 0.0;
                }
                let mut y = self.x.clone();
                y[i] += t;
                self.obj.value(&y) - self.fx
            }),
            Direction::Vector(d) => Box::new(move |t| {
                if t == 0.0 {
                    return 0.0;
                }
                self.obj.directional_value(&self.x, d, t) - self.fx
            }),
        }
    }

    fn slope(&self, dir: Direction<'_>) -> Option<f64> {
        if !self.obj.has_gradient() {
            return None;
        }
        match dir {
            Direction::Coord(i) => self.obj.partial(i, &self.x).ok(),
            Direction::Vector(d) => self.obj.gradient(&self.x).ok().map(|g| dot(&g, d)),
        }
    }

    fn advance(&mut self, dir: Direction<'_>, t: f64) {
        dir.step(&mut self.x, t);
        self.fx = self.obj.value(&self.x);
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// Objective assembled from closures; handy for small analytic test functions.
pub struct FnObjective {
    dim: usize,
    value: ValueFn,
    gradient: Option<GradFn>,
}

impl FnObjective {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self { dim, value: Box::new(value), gradient: Some(Box::new(gradient)) }
    }

    /// Derivative-free objective: only values are available.
    pub fn value_only(dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { dim, value: Box::new(value), gradient: None }
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match &self.gradient {
            Some(g) => {
                g(x, out);
                Ok(())
            }
            None => Err(Error::GradientUnavailable),
        }
    }
}

/// Quadratic `V(x) = ½ xᵀ H x − bᵀ x` with symmetric `H` stored densely (row-major).
#[derive(Clone, Debug)]
pub struct Quadratic {
    n: usize,
    h: Vec<f64>,
    b: Vec<f64>,
}

impl Quadratic {
    pub fn new(n: usize, h: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if h.len() != n * n || b.len() != n {
            return config("quadratic: H must be n×n and b of length n");
        }
        for i in 0..n {
            for j in 0..i {
                if (h[i * n + j] - h[j * n + i]).abs() > 1e-12 * (1.0 + h[i * n + j].abs()) {
                    return config("quadratic: H must be symmetric");
                }
            }
        }
        Ok(Self { n, h, b })
    }

    pub fn hessian(&self) -> &[f64] {
        &self.h
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.b
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.n + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.h[i * self.n..(i + 1) * self.n]
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut hx = vec![0.0; self.n];
        self.apply(x, &mut hx);
        0.5 * dot(x, &hx) - dot(&self.b, x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.apply(x, out);
        for (o, b) in out.iter_mut().zip(&self.b) {
            *o -= b;
        }
        Ok(())
    }

    fn is_quadratic(&self) -> bool {
        true
    }

    fn partial(&self, i: usize, x: &[f64]) -> Result<f64> {
        Ok(dot(self.row(i), x) - self.b[i])
    }

    fn cursor(&self, x: &[f64]) -> Box<dyn LineCursor + '_> {
        let g = self.gradient(x).expect("quadratic gradient");
        Box::new(QuadraticCursor { q: self, x: x.to_vec(), g })
    }
}

struct QuadraticCursor<'a> {
    q: &'a Quadratic,
    x: Vec<f64>,
    g: Vec<f64>,
}

impl LineCursor for QuadraticCursor<'_> {
    fn point(&self) -> &[f64] {
        &self.x
    }

    fn restrict<'s>(&'s self, dir: Direction<'s>) -> Restriction<'s> {
        let (gd, dhd) = match dir {
            Direction::Coord(i) => (self.g[i], self.q.entry(i, i)),
            Direction::Vector(d) => {
                let mut hd = vec![0.0; self.q.n];
                self.q.apply(d, &mut hd);
                (dot(&self.g, d), dot(d, &hd))
            }
        };
        Box::new(move |t| t * gd + 0.5 * t * t * dhd)
    }

    fn slope(&self, dir: Direction<'_>) -> Option<f64> {
        Some(dir.dot(&self.g))
    }

    fn advance(&mut self, dir: Direction<'_>, t: f64) {
        dir.step(&mut self.x, t);
        match dir {
            Direction::Coord(i) => {
                // H is symmetric, so column i equals row i.
                let row = &self.q.h[i * self.q.n..(i + 1) * self.q.n];
                linalg::axpy(t, row, &mut self.g);
            }
            Direction::Vector(d) => {
                let mut hd = vec![0.0; self.q.n];
                self.q.apply(d, &mut hd);
                linalg::axpy(t, &hd, &mut self.g);
            }
        }
    }
}

/// Smoothness and convexity constants of an objective.
///
/// `coord_lipschitz[i]` bounds the Lipschitz constant of `∂_i V` as a map on
/// all of ℝⁿ, and `l_sum` is their ℓ² norm. `coord_curvature[i]` is the
/// directional constant `L_{e_i}` along the i-th coordinate; its maximum is
/// the `l_max_dir` used by coordinate sampling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessInfo {
    pub lipschitz: f64,
    pub coord_lipschitz: Vec<f64>,
    pub coord_curvature: Vec<f64>,
    pub l_sum: f64,
    pub l_max_dir: f64,
    pub mu: f64,
    pub pl_mu: f64,
    pub convex: bool,
    pub v_star: Option<f64>,
}

impl SmoothnessInfo {
    pub fn new(
        lipschitz: f64,
        coord_lipschitz: Vec<f64>,
        coord_curvature: Vec<f64>,
        mu: f64,
        pl_mu: f64,
        convex: bool,
        v_star: Option<f64>,
    ) -> Self {
        let l_sum = norm(&coord_lipschitz);
        let l_max_dir = coord_curvature.iter().cloned().fold(0.0, f64::max);
        Self { lipschitz, coord_lipschitz, coord_curvature, l_sum, l_max_dir, mu, pl_mu, convex, v_star }
    }

    /// Constants of `½‖x‖²`-like isotropic problems: every constant equals `l`.
    pub fn isotropic(n: usize, l: f64, mu: f64) -> Self {
        Self::new(l, vec![l; n], vec![l; n], mu, mu, true, Some(0.0))
    }

    pub fn dim(&self) -> usize {
        self.coord_lipschitz.len()
    }

    /// Directional constant `L_max` for the given sampling distribution.
    pub fn l_max_for(&self, dist: &DirectionDistribution) -> f64 {
        match dist.kind {
            DirectionKind::UniformSphere => self.lipschitz,
            _ => self.l_max_dir,
        }
    }

    pub fn condition_number(&self) -> f64 {
        if self.mu > 0.0 {
            self.lipschitz / self.mu
        } else if self.pl_mu > 0.0 {
            self.lipschitz / self.pl_mu
        } else {
            f64::INFINITY
        }
    }

    /// Checks the ordering relations between the constants.
    pub fn check(&self) -> Result<()> {
        let n = self.dim() as f64;
        let slack = 1e-9 * (1.0 + self.lipschitz);
        if !(self.lipschitz >= 0.0 && self.mu >= 0.0 && self.pl_mu >= 0.0) {
            return config("smoothness constants must be nonnegative");
        }
        if self.coord_curvature.len() != self.coord_lipschitz.len() {
            return config("coordinate constant vectors have different lengths");
        }
        if self.l_sum + slack < self.lipschitz || self.l_sum > n.sqrt() * self.lipschitz + slack {
            return config(format!(
                "L_sum = {} outside [L, sqrt(n) L] = [{}, {}]",
                self.l_sum,
                self.lipschitz,
                n.sqrt() * self.lipschitz
            ));
        }
        if self.l_max_dir > self.lipschitz + slack {
            return config("L_max exceeds L");
        }
        if self.mu > 0.0 && self.pl_mu + slack < self.mu {
            return config("a mu-convex function satisfies PL with at least mu");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    CyclicCoordinates,
    UniformCoordinates,
    UniformSphere,
}

/// Distribution of descent directions for the randomised Itoh–Abe method.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionDistribution {
    pub kind: DirectionKind,
    pub zeta: f64,
}

impl DirectionDistribution {
    /// Both uniform distributions (and a full cycle of coordinates) have `ζ = 1/n`.
    pub fn new(kind: DirectionKind, n: usize) -> Result<Self> {
        if n == 0 {
            return config("direction distribution needs n >= 1");
        }
        Ok(Self { kind, zeta: 1.0 / n as f64 })
    }
}

/// Central-difference approximation of the gradient.
pub fn finite_difference_gradient(obj: &dyn Objective, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return config("finite difference step must be positive");
    }
    let mut y = x.to_vec();
    let mut g = vec![0.0; x.len()];
    for i in 0..x.len() {
        let xi = y[i];
        y[i] = xi + h;
        let fp = check_finite(obj.value(&y), "finite difference")?;
        y[i] = xi - h;
        let fm = check_finite(obj.value(&y), "finite difference")?;
        y[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Largest observed ratio of each finite difference quotient to its advertised constant.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SmoothnessReport {
    pub lipschitz_ratio: f64,
    pub coord_lipschitz_ratio: f64,
    pub coord_curvature_ratio: f64,
    pub pairs: usize,
}

/// Samples point pairs and checks that gradient differences respect the constants.
///
/// Points are drawn from a standard Gaussian and perturbed at scales between
/// 1e-3 and 1. A ratio above 1.01 is reported as a metadata error naming the
/// violated constant.
pub fn validate_smoothness(
    obj: &dyn Objective,
    info: &SmoothnessInfo,
    samples: usize,
    seed: u64,
) -> Result<SmoothnessReport> {
    validate_smoothness_around(obj, info, &vec![0.0; obj.dim()], 1.0, samples, seed)
}

/// Like [`validate_smoothness`], with points drawn from `center + scale·N(0, I)`.
pub fn validate_smoothness_around(
    obj: &dyn Objective,
    info: &SmoothnessInfo,
    center: &[f64],
    scale: f64,
    samples: usize,
    seed: u64,
) -> Result<SmoothnessReport> {
    if !obj.has_gradient() {
        return Err(Error::GradientUnavailable);
    }
    if samples == 0 {
        return config("validate_smoothness needs at least one sample");
    }
    let n = obj.dim();
    let mut rng = linalg::rng(seed);
    let mut report = SmoothnessReport { pairs: samples, ..Default::default() };
    let coords_per_pair = n.min(16);
    for _ in 0..samples {
        let x: Vec<f64> = linalg::gaussian_vec(&mut rng, n)
            .iter()
            .zip(center)
            .map(|(z, c)| c + scale * z)
            .collect();
        let r = 10f64.powf(rng.random_range(-3.0..0.0)) * scale;
        let u = linalg::unit_sphere(&mut rng, n);
        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + r * b).collect();
        let gx = obj.gradient(&x)?;
        let gy = obj.gradient(&y)?;
        let dxy = linalg::dist(&x, &y);
        if dxy == 0.0 {
            continue;
        }
        let gdiff = linalg::dist(&gx, &gy);
        if info.lipschitz > 0.0 {
            report.lipschitz_ratio = report.lipschitz_ratio.max(gdiff / (dxy * info.lipschitz));
        } else if gdiff > 0.0 {
            report.lipschitz_ratio = f64::INFINITY;
        }
        for i in 0..n {
            let li = info.coord_lipschitz[i];
            let ratio = (gx[i] - gy[i]).abs() / dxy;
            let scaled = if li > 0.0 { ratio / li } else if ratio > 0.0 { f64::INFINITY } else { 0.0 };
            report.coord_lipschitz_ratio = report.coord_lipschitz_ratio.max(scaled);
        }
        for _ in 0..coords_per_pair {
            let i = rng.random_range(0..n);
            let t = r * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let mut xt = x.clone();
            xt[i] += t;
            let diff = (obj.partial(i, &xt)? - gx[i]).abs() / t.abs();
            let li = info.coord_curvature[i];
            let scaled = if li > 0.0 { diff / li } else if diff > 0.0 { f64::INFINITY } else { 0.0 };
            report.coord_curvature_ratio = report.coord_curvature_ratio.max(scaled);
        }
    }
    const LIMIT: f64 = 1.01;
    for (name, ratio) in [
        ("L", report.lipschitz_ratio),
        ("L_coord", report.coord_lipschitz_ratio),
        ("L_i (coordinate curvature)", report.coord_curvature_ratio),
    ] {
        if ratio > LIMIT {
            return Err(Error::Metadata { constant: name.to_string(), ratio });
        }
    }
    Ok(report)
}
