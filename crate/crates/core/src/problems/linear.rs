//! Least squares `V(x) = ½‖Ax − b‖²` with prescribed singular values.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::spaced_values;
use crate::error::{config, Result};
use crate::linalg::{self, axpy, dot, matvec, matvec_t};
use crate::objective::{Direction, LineCursor, Objective, Restriction, SmoothnessInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearConfig {
    /// Unknowns.
    pub n: usize,
    /// Equations.
    pub m: usize,
    /// Condition number of `AᵀA` restricted to its range.
    pub kappa: f64,
    /// Extra zero singular values beyond those forced by the shape.
    pub kernel_dim: usize,
    /// Draw entries uniformly from `[0, 1]` instead of a standard Gaussian.
    pub uniform: bool,
    pub seed: u64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        Self { n: 100, m: 100, kappa: 100.0, kernel_dim: 0, uniform: false, seed: 0 }
    }
}

/// A dense least-squares objective. `A` is stored column-major so coordinate
/// updates of the residual touch one contiguous column.
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: Vec<f64>,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return config("A and b have incompatible shapes");
        }
        Ok(Self { a, b })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn column(&self, j: usize) -> &[f64] {
        linalg::column(&self.a, j)
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.a.nrows()];
        matvec(&self.a, x, &mut r);
        axpy(-1.0, &self.b, &mut r);
        r
    }
}

impl Objective for LinearSystem {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = self.residual(x);
        0.5 * dot(&r, &r)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let r = self.residual(x);
        matvec_t(&self.a, &r, out);
        Ok(())
    }

    fn is_quadratic(&self) -> bool {
        true
    }

    fn partial(&self, i: usize, x: &[f64]) -> Result<f64> {
        Ok(dot(self.column(i), &self.residual(x)))
    }

    fn cursor(&self, x: &[f64]) -> Box<dyn LineCursor + '_> {
        Box::new(ResidualCursor { sys: self, x: x.to_vec(), r: self.residual(x) })
    }
}

/// Tracks `r = Ax − b`; a coordinate restriction costs `O(m)`.
struct ResidualCursor<'a> {
    sys: &'a LinearSystem,
    x: Vec<f64>,
    r: Vec<f64>,
}

impl ResidualCursor<'_> {
    fn image(&self, dir: Direction<'_>) -> Vec<f64> {
        match dir {
            Direction::Coord(i) => self.sys.column(i).to_vec(),
            Direction::Vector(d) => {
                let mut ad = vec![0.0; self.r.len()];
                matvec(&self.sys.a, d, &mut ad);
                ad
            }
        }
    }
}

impl LineCursor for ResidualCursor<'_> {
    fn point(&self) -> &[f64] {
        &self.x
    }

    fn restrict<'s>(&'s self, dir: Direction<'s>) -> Restriction<'s> {
        let (ar, aa) = match dir {
            Direction::Coord(i) => {
                let c = self.sys.column(i);
                (dot(c, &self.r), dot(c, c))
            }
            Direction::Vector(_) => {
                let ad = self.image(dir);
                (dot(&ad, &self.r), dot(&ad, &ad))
            }
        };
        Box::new(move |t| t * ar + 0.5 * t * t * aa)
    }

    fn slope(&self, dir: Direction<'_>) -> Option<f64> {
        Some(match dir {
            Direction::Coord(i) => dot(self.sys.column(i), &self.r),
            Direction::Vector(_) => dot(&self.image(dir), &self.r),
        })
    }

    fn advance(&mut self, dir: Direction<'_>, t: f64) {
        dir.step(&mut self.x, t);
        match dir {
            Direction::Coord(i) => axpy(t, self.sys.column(i), &mut self.r),
            Direction::Vector(_) => {
                let ad = self.image(dir);
                axpy(t, &ad, &mut self.r);
            }
        }
    }
}

/// A generated least-squares instance with its exact solution data.
pub struct LinearProblem {
    pub system: LinearSystem,
    pub info: SmoothnessInfo,
    /// Minimum-norm least-squares solution.
    pub x_star: Vec<f64>,
    pub singular_values: Vec<f64>,
    /// Orthonormal basis (rows) of the range of `Aᵀ`; present when `A` has a kernel.
    pub row_space: Option<DMatrix<f64>>,
}

impl LinearProblem {
    /// Orthogonal projection onto the range of `Aᵀ`, the subspace that DG iterates from `x⁰ = 0` never leave.
    pub fn project_row_space(&self, u: &mut [f64]) {
        if let Some(vt) = &self.row_space {
            let mut c = vec![0.0; vt.nrows()];
            matvec(vt, u, &mut c);
            matvec_t(vt, &c, u);
        }
    }

    /// Achieved condition number of `AᵀA` on its range.
    pub fn kappa(&self) -> f64 {
        let nz: Vec<f64> = self.singular_values.iter().cloned().filter(|s| *s > 0.0).collect();
        let hi = nz.iter().cloned().fold(0.0, f64::max);
        let lo = nz.iter().cloned().fold(f64::INFINITY, f64::min);
        (hi / lo).powi(2)
    }
}

/// Draws `A` with i.i.d. entries, replaces its singular values by values linearly
/// spaced in `[1/√κ, 1]`, zeroes `kernel_dim` of them and draws a Gaussian `b`.
pub fn make_linear_system(cfg: &LinearConfig) -> Result<LinearProblem> {
    let (m, n) = (cfg.m, cfg.n);
    if m == 0 || n == 0 {
        return config("linear system needs m, n >= 1");
    }
    if !(cfg.kappa >= 1.0 && cfg.kappa.is_finite()) {
        return config("kappa must be a finite number >= 1");
    }
    let r = m.min(n);
    if cfg.kernel_dim >= r {
        return config(format!("kernel_dim {} must be below min(m, n) = {r}", cfg.kernel_dim));
    }
    let mut rng = linalg::rng(cfg.seed);
    let entries: Vec<f64> = if cfg.uniform {
        (0..m * n).map(|_| rng.random::<f64>()).collect()
    } else {
        linalg::gaussian_vec(&mut rng, m * n)
    };
    let g = DMatrix::from_column_slice(m, n, &entries);
    let b = linalg::gaussian_vec(&mut rng, m);
    let svd = g.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return config("singular value decomposition failed"),
    };
    let rank = r - cfg.kernel_dim;
    let mut sigma = spaced_values(rank, 1.0 / cfg.kappa.sqrt(), 1.0);
    sigma.resize(r, 0.0);
    let a = &u * DMatrix::from_diagonal(&DVector::from_column_slice(&sigma)) * &vt;

    // Minimum-norm solution through the constructed factorisation.
    let ut_b = u.transpose() * DVector::from_column_slice(&b);
    let mut coef = DVector::zeros(r);
    for k in 0..rank {
        coef[k] = ut_b[k] / sigma[k];
    }
    let x_star: Vec<f64> = (vt.transpose() * coef).iter().cloned().collect();

    let gram = a.transpose() * &a;
    let coord_curvature: Vec<f64> = (0..n).map(|i| gram[(i, i)]).collect();
    let coord_lipschitz: Vec<f64> = (0..n).map(|i| gram.column(i).norm().min(1.0)).collect();
    let system = LinearSystem::new(a, b)?;
    let v_star = if rank == m { 0.0 } else { system.value(&x_star) };
    let full_column_rank = rank == n;
    let pl = sigma[rank - 1].powi(2);
    let info = SmoothnessInfo::new(
        1.0,
        coord_lipschitz,
        coord_curvature,
        if full_column_rank { pl } else { 0.0 },
        pl,
        true,
        Some(v_star),
    );
    let row_space = (!full_column_rank).then(|| vt.rows(0, rank).into_owned());
    Ok(LinearProblem { system, info, x_star, singular_values: sigma, row_space })
}
