//! ℓ²-regularised logistic regression
//! `V(w) = C Σ_i log(1 + exp(−y_i ⟨w, x^i⟩)) + ½‖w‖²`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::linalg::{self, axpy, dot, matvec, matvec_t, norm};
use crate::objective::{Direction, LineCursor, Objective, Restriction, SmoothnessInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self { n: 100, m: 200, c: 1.0, seed: 0 }
    }
}

/// `log(1 + e^u)` without overflow.
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{−u})`
fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `softplus(u + d) − softplus(u)` without cancellation for small `d`.
fn softplus_diff(u: f64, d: f64) -> f64 {
    if d.abs() < 1.0 {
        (sigmoid(u) * d.exp_m1()).ln_1p()
    } else {
        softplus(u + d) - softplus(u)
    }
}

pub struct Logistic {
    /// Samples as rows, stored column-major (`m × n`).
    x: DMatrix<f64>,
    y: Vec<f64>,
    c: f64,
}

impl Logistic {
    pub fn new(x: DMatrix<f64>, y: Vec<f64>, c: f64) -> Result<Self> {
        if x.nrows() != y.len() {
            return config("data and labels have different lengths");
        }
        if y.iter().any(|v| *v != 1.0 && *v != -1.0) {
            return config("labels must be ±1");
        }
        if !(c >= 0.0) {
            return config("C must be nonnegative");
        }
        Ok(Self { x, y, c })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    fn margins(&self, w: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.x.nrows()];
        matvec(&self.x, w, &mut z);
        z
    }

    fn column(&self, j: usize) -> &[f64] {
        linalg::column(&self.x, j)
    }

    /// `∂ loss / ∂ z_i` for the data term.
    fn weights(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.y).map(|(zi, yi)| -self.c * yi * sigmoid(-yi * zi)).collect()
    }

    /// Dense Hessian `C Xᵀ D X + I`.
    pub fn hessian(&self, w: &[f64]) -> DMatrix<f64> {
        let z = self.margins(w);
        let n = self.x.ncols();
        let d: Vec<f64> = z.iter().zip(&self.y).map(|(zi, yi)| {
            let s = sigmoid(-yi * zi);
            self.c * s * (1.0 - s)
        }).collect();
        let mut dx = self.x.clone();
        for (i, di) in d.iter().enumerate() {
            dx.row_mut(i).scale_mut(*di);
        }
        self.x.transpose() * dx + DMatrix::identity(n, n)
    }
}

impl Objective for Logistic {
    fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let z = self.margins(w);
        let loss: f64 = z.iter().zip(&self.y).map(|(zi, yi)| softplus(-yi * zi)).sum();
        self.c * loss + 0.5 * dot(w, w)
    }

    fn gradient_into(&self, w: &[f64], out: &mut [f64]) -> Result<()> {
        let z = self.margins(w);
        matvec_t(&self.x, &self.weights(&z), out);
        axpy(1.0, w, out);
        Ok(())
    }

    fn partial(&self, i: usize, w: &[f64]) -> Result<f64> {
        let z = self.margins(w);
        Ok(dot(self.column(i), &self.weights(&z)) + w[i])
    }

    fn cursor(&self, w: &[f64]) -> Box<dyn LineCursor + '_> {
        Box::new(MarginCursor { p: self, w: w.to_vec(), z: self.margins(w) })
    }
}

/// Tracks the margins `z = X w`.
struct MarginCursor<'a> {
    p: &'a Logistic,
    w: Vec<f64>,
    z: Vec<f64>,
}

impl MarginCursor<'_> {
    fn image(&self, dir: Direction<'_>) -> Vec<f64> {
        match dir {
            Direction::Coord(i) => self.p.column(i).to_vec(),
            Direction::Vector(d) => {
                let mut xd = vec![0.0; self.z.len()];
                matvec(&self.p.x, d, &mut xd);
                xd
            }
        }
    }
}

impl LineCursor for MarginCursor<'_> {
    fn point(&self) -> &[f64] {
        &self.w
    }

    fn restrict<'s>(&'s self, dir: Direction<'s>) -> Restriction<'s> {
        let xd = self.image(dir);
        let (wd, dd) = match dir {
            Direction::Coord(i) => (self.w[i], 1.0),
            Direction::Vector(d) => (dot(&self.w, d), dot(d, d)),
        };
        Box::new(move |t| {
            if t == 0.0 {
                return 0.0;
            }
            let loss: f64 = self
                .z
                .iter()
                .zip(&self.p.y)
                .zip(&xd)
                .map(|((zi, yi), xi)| softplus_diff(-yi * zi, -yi * t * xi))
                .sum();
            self.p.c * loss + t * wd + 0.5 * t * t * dd
        })
    }

    fn slope(&self, dir: Direction<'_>) -> Option<f64> {
        let wts = self.p.weights(&self.z);
        Some(match dir {
            Direction::Coord(i) => dot(self.p.column(i), &wts) + self.w[i],
            Direction::Vector(d) => dot(&self.image(dir), &wts) + dot(&self.w, d),
        })
    }

    fn advance(&mut self, dir: Direction<'_>, t: f64) {
        match dir {
            Direction::Coord(i) => axpy(t, self.p.column(i), &mut self.z),
            Direction::Vector(_) => {
                let xd = self.image(dir);
                axpy(t, &xd, &mut self.z);
            }
        }
        dir.step(&mut self.w, t);
    }
}

pub struct LogisticProblem {
    pub objective: Logistic,
    pub info: SmoothnessInfo,
    pub w_star: Vec<f64>,
}

/// Minimiser by damped Newton with a Cholesky solve; `V` is 1-convex so this converges globally.
pub fn newton_minimise(p: &Logistic, w0: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let mut w = w0.to_vec();
    for _ in 0..max_iter {
        let g = p.gradient(&w)?;
        if norm(&g) <= tol {
            return Ok(w);
        }
        let h = p.hessian(&w);
        let Some(chol) = h.cholesky() else {
            return config("logistic Hessian is not positive definite");
        };
        let s = chol.solve(&DVector::from_column_slice(&g));
        let fw = p.value(&w);
        let slope = -dot(&g, s.as_slice());
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = w.iter().zip(s.iter()).map(|(a, b)| a - t * b).collect();
            if p.value(&trial) <= fw + 1e-4 * t * slope || t < 1e-12 {
                w = trial;
                break;
            }
            t *= 0.5;
        }
    }
    let g = p.gradient(&w)?;
    if norm(&g) <= 1e3 * tol {
        Ok(w)
    } else {
        Err(crate::Error::InnerSolver { iterations: max_iter, residual: norm(&g) })
    }
}

/// Gaussian features and Rademacher labels.
pub fn make_logistic(cfg: &LogisticConfig) -> Result<LogisticProblem> {
    let (m, n) = (cfg.m, cfg.n);
    if m == 0 || n == 0 {
        return config("logistic problem needs m, n >= 1");
    }
    let mut rng = linalg::rng(cfg.seed);
    let x = DMatrix::from_column_slice(m, n, &linalg::gaussian_vec(&mut rng, m * n));
    let y: Vec<f64> = (0..m).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let smax = x.singular_values().max();
    let l = cfg.c / 4.0 * smax * smax + 1.0;
    let row_norms: Vec<f64> = (0..m).map(|i| x.row(i).norm()).collect();
    let coord_curvature: Vec<f64> = (0..n).map(|j| cfg.c / 4.0 * x.column(j).norm_squared() + 1.0).collect();
    let coord_lipschitz: Vec<f64> = (0..n)
        .map(|j| {
            let s: f64 = (0..m).map(|i| x[(i, j)].abs() * row_norms[i]).sum();
            (cfg.c / 4.0 * s + 1.0).min(l)
        })
        .collect();
    let objective = Logistic::new(x, y, cfg.c)?;
    let w_star = newton_minimise(&objective, &vec![0.0; n], 1e-12 * (1.0 + cfg.c * m as f64), 100)?;
    let v_star = objective.value(&w_star);
    let info = SmoothnessInfo::new(l, coord_lipschitz, coord_curvature, 1.0, 1.0, true, Some(v_star));
    Ok(LogisticProblem { objective, info, w_star })
}
