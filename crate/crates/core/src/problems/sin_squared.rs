//! Nonconvex PŁ function `V(x) = ‖Ax‖² + 3 sin²(⟨c, x⟩)` with `Ac = c`, `‖c‖ = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::spaced_values;
use crate::error::{config, Result};
use crate::linalg::{self, axpy, dot, matvec, norm};
use crate::objective::{Direction, LineCursor, Objective, Restriction, SmoothnessInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SinSquaredConfig {
    pub n: usize,
    /// Condition number of `AᵀA`.
    pub kappa: f64,
    pub seed: u64,
}

impl Default for SinSquaredConfig {
    fn default() -> Self {
        Self { n: 50, kappa: 10.0, seed: 0 }
    }
}

pub struct SinSquared {
    a: DMatrix<f64>,
    /// `M = AᵀA`, symmetric.
    m: DMatrix<f64>,
    c: Vec<f64>,
}

impl SinSquared {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn direction(&self) -> &[f64] {
        &self.c
    }

    fn mcol(&self, i: usize) -> &[f64] {
        linalg::column(&self.m, i)
    }

    fn mx(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        matvec(&self.m, x, &mut out);
        out
    }
}

impl Objective for SinSquared {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; x.len()];
        matvec(&self.a, x, &mut ax);
        dot(&ax, &ax) + 3.0 * dot(&self.c, x).sin().powi(2)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        matvec(&self.m, x, out);
        out.iter_mut().for_each(|v| *v *= 2.0);
        axpy(3.0 * (2.0 * dot(&self.c, x)).sin(), &self.c, out);
        Ok(())
    }

    fn partial(&self, i: usize, x: &[f64]) -> Result<f64> {
        Ok(2.0 * dot(self.mcol(i), x) + 3.0 * (2.0 * dot(&self.c, x)).sin() * self.c[i])
    }

    fn cursor(&self, x: &[f64]) -> Box<dyn LineCursor + '_> {
        Box::new(SinCursor { p: self, x: x.to_vec(), mx: self.mx(x), phase: dot(&self.c, x) })
    }
}

/// Tracks `Mx` and `⟨c, x⟩`.
struct SinCursor<'a> {
    p: &'a SinSquared,
    x: Vec<f64>,
    mx: Vec<f64>,
    phase: f64,
}

impl SinCursor<'_> {
    /// `(⟨Mx, d⟩, dᵀMd, ⟨c, d⟩)`
    fn coefficients(&self, dir: Direction<'_>) -> (f64, f64, f64) {
        match dir {
            Direction::Coord(i) => (self.mx[i], self.p.m[(i, i)], self.p.c[i]),
            Direction::Vector(d) => {
                let md = self.p.mx(d);
                (dot(&self.mx, d), dot(d, &md), dot(&self.p.c, d))
            }
        }
    }
}

impl LineCursor for SinCursor<'_> {
    fn point(&self) -> &[f64] {
        &self.x
    }

    fn restrict<'s>(&'s self, dir: Direction<'s>) -> Restriction<'s> {
        let (mxd, dmd, cd) = self.coefficients(dir);
        let p = self.phase;
        // sin²(a) − sin²(b) = sin(a − b) sin(a + b)
        Box::new(move |t| 2.0 * t * mxd + t * t * dmd + 3.0 * (t * cd).sin() * (2.0 * p + t * cd).sin())
    }

    fn slope(&self, dir: Direction<'_>) -> Option<f64> {
        let (mxd, _, cd) = self.coefficients(dir);
        Some(2.0 * mxd + 3.0 * (2.0 * self.phase).sin() * cd)
    }

    fn advance(&mut self, dir: Direction<'_>, t: f64) {
        match dir {
            Direction::Coord(i) => {
                axpy(t, self.p.mcol(i), &mut self.mx);
                self.phase += t * self.p.c[i];
            }
            Direction::Vector(d) => {
                let md = self.p.mx(d);
                axpy(t, &md, &mut self.mx);
                self.phase += t * dot(&self.p.c, d);
            }
        }
        dir.step(&mut self.x, t);
    }
}

pub struct SinSquaredProblem {
    pub objective: SinSquared,
    pub info: SmoothnessInfo,
}

/// Random unit `c`, orthonormal `Q` with first column `c`, and
/// `A = Q diag(s) Qᵀ` with `s` linearly spaced in `[1/√κ, 1]` and `s_1 = 1`.
pub fn make_sin_squared(cfg: &SinSquaredConfig) -> Result<SinSquaredProblem> {
    let n = cfg.n;
    if n == 0 {
        return config("sin² problem needs n >= 1");
    }
    if !(cfg.kappa >= 1.0 && cfg.kappa.is_finite()) {
        return config("kappa must be a finite number >= 1");
    }
    let mut rng = linalg::rng(cfg.seed);
    let c = linalg::unit_sphere(&mut rng, n);
    let mut g = DMatrix::from_column_slice(n, n, &linalg::gaussian_vec(&mut rng, n * n));
    g.set_column(0, &DVector::from_column_slice(&c));
    let mut q = g.qr().q();
    // The first column of Q is ±c; fix the sign and pin it to c exactly.
    if dot(q.column(0).as_slice(), &c) < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q.set_column(0, &DVector::from_column_slice(&c));
    let s = spaced_values(n, 1.0 / cfg.kappa.sqrt(), 1.0);
    let qs = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&s));
    let a = &qs * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let m = a.transpose() * &a;
    let m = (&m + m.transpose()) * 0.5;

    let coord_curvature: Vec<f64> = (0..n).map(|i| 2.0 * m[(i, i)] + 6.0 * c[i] * c[i]).collect();
    let l = 8.0;
    let coord_lipschitz: Vec<f64> =
        (0..n).map(|i| (2.0 * m.column(i).norm() + 6.0 * c[i].abs()).min(l)).collect();
    let kappa = cfg.kappa;
    let info = SmoothnessInfo::new(l, coord_lipschitz, coord_curvature, 0.0, 1.0 / (32.0 * kappa), false, Some(0.0));
    Ok(SinSquaredProblem { objective: SinSquared { a, m, c }, info })
}

impl SinSquaredProblem {
    /// `‖Ac − c‖`, zero up to rounding.
    pub fn eigen_defect(&self) -> f64 {
        let mut ac = vec![0.0; self.objective.c.len()];
        matvec(&self.objective.a, &self.objective.c, &mut ac);
        linalg::dist(&ac, &self.objective.c)
    }

    pub fn kappa(&self) -> f64 {
        let ev = self.objective.m.symmetric_eigenvalues();
        let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        hi / lo
    }

    /// `½‖∇V(x)‖² / V(x)`, which must stay above the PŁ constant.
    pub fn pl_ratio(&self, x: &[f64]) -> Result<f64> {
        let g = self.objective.gradient(x)?;
        Ok(0.5 * dot(&g, &g) / self.objective.value(x))
    }

    pub fn c_norm(&self) -> f64 {
        norm(&self.objective.c)
    }
}
