//! Test problems with exact smoothness constants, reproducible from `(shape, seed)`.

pub mod image;
pub mod linear;
pub mod logistic;
pub mod sin_squared;
pub mod tv;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::linalg::{self, matvec, matvec_t};
use crate::objective::{Objective, Quadratic, SmoothnessInfo};
use crate::rates;

pub use linear::{make_linear_system, LinearConfig, LinearSystem};
pub use logistic::{make_logistic, Logistic, LogisticConfig};
pub use sin_squared::{make_sin_squared, SinSquared, SinSquaredConfig};
pub use tv::{make_tv_denoise, TvConfig, TvDenoise};

/// `count` values linearly spaced from `hi` down to `lo`.
pub(crate) fn spaced_values(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..count).map(|k| hi - (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadraticConfig {
    pub n: usize,
    pub kappa: f64,
    pub seed: u64,
}

impl Default for QuadraticConfig {
    fn default() -> Self {
        Self { n: 50, kappa: 100.0, seed: 0 }
    }
}

/// Constants of a quadratic with Hessian `h`: `L̄_i` are row norms and `L_i` diagonal entries.
pub fn quadratic_info(h: &DMatrix<f64>, l: f64, mu: f64, pl_mu: f64, v_star: Option<f64>) -> SmoothnessInfo {
    let n = h.nrows();
    let curv = (0..n).map(|i| h[(i, i)]).collect();
    let rows = (0..n).map(|i| h.row(i).norm().min(l)).collect();
    SmoothnessInfo::new(l, rows, curv, mu, pl_mu, true, v_star)
}

/// `½xᵀHx − bᵀx` with `H = Q diag(λ) Qᵀ`, `λ` linearly spaced in `[1/κ, 1]`, random orthogonal `Q` and Gaussian `b`.
pub fn random_quadratic(cfg: &QuadraticConfig) -> Result<(Quadratic, SmoothnessInfo, Vec<f64>)> {
    let n = cfg.n;
    if n == 0 || !(cfg.kappa >= 1.0 && cfg.kappa.is_finite()) {
        return config("random quadratic needs n >= 1 and a finite kappa >= 1");
    }
    let mut rng = linalg::rng(cfg.seed);
    let g = DMatrix::from_column_slice(n, n, &linalg::gaussian_vec(&mut rng, n * n));
    let q = g.qr().q();
    let lam = spaced_values(n, 1.0 / cfg.kappa, 1.0);
    let h = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&lam)) * q.transpose();
    let h = (&h + h.transpose()) * 0.5;
    let b = linalg::gaussian_vec(&mut rng, n);
    let x_star: Vec<f64> = match h.clone().cholesky() {
        Some(c) => c.solve(&DVector::from_column_slice(&b)).iter().cloned().collect(),
        None => return config("generated Hessian is not positive definite"),
    };
    let v_star = -0.5 * linalg::dot(&b, &x_star);
    let mu = 1.0 / cfg.kappa;
    let info = quadratic_info(&h, 1.0, mu, mu, Some(v_star));
    let rowmajor: Vec<f64> = h.transpose().iter().cloned().collect();
    Ok((Quadratic::new(n, rowmajor, b)?, info, x_star))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemConfig {
    Quadratic(QuadraticConfig),
    Linear(LinearConfig),
    Logistic(LogisticConfig),
    SinSquared(SinSquaredConfig),
    Tv(TvConfig),
}

impl ProblemConfig {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Quadratic(_) => "quadratic",
            Self::Linear(_) => "linear",
            Self::Logistic(_) => "logistic",
            Self::SinSquared(_) => "sin_squared",
            Self::Tv(_) => "tv",
        }
    }

    /// Replaces the construction seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            Self::Quadratic(c) => c.seed = seed,
            Self::Linear(c) => c.seed = seed,
            Self::Logistic(c) => c.seed = seed,
            Self::SinSquared(c) => c.seed = seed,
            Self::Tv(c) => c.seed = seed,
        }
        self
    }

    pub fn build(&self) -> Result<Problem> {
        Problem::build(self)
    }
}

/// A constructed problem: objective, constants, starting point and reference solution.
pub struct Problem {
    /// `None` for objectives supplied by the caller.
    pub config: Option<ProblemConfig>,
    objective: Box<dyn Objective>,
    pub info: SmoothnessInfo,
    pub x0: Vec<f64>,
    pub x_star: Option<Vec<f64>>,
    /// Orthonormal rows spanning the subspace the iterates stay in, for rank-deficient systems.
    row_space: Option<DMatrix<f64>>,
    /// `(rows, cols)` for image problems.
    pub image_shape: Option<(usize, usize)>,
    /// Ground truth for image problems.
    pub truth: Option<Vec<f64>>,
}

impl Problem {
    pub fn build(cfg: &ProblemConfig) -> Result<Self> {
        let p = match cfg {
            ProblemConfig::Quadratic(c) => {
                let (q, info, x_star) = random_quadratic(c)?;
                Self::plain(Some(cfg), Box::new(q), info, vec![0.0; c.n], Some(x_star))
            }
            ProblemConfig::Linear(c) => {
                let lp = make_linear_system(c)?;
                let mut p = Self::plain(Some(cfg), Box::new(lp.system), lp.info, vec![0.0; c.n], Some(lp.x_star));
                p.row_space = lp.row_space;
                p
            }
            ProblemConfig::Logistic(c) => {
                let lp = make_logistic(c)?;
                Self::plain(Some(cfg), Box::new(lp.objective), lp.info, vec![0.0; c.n], Some(lp.w_star))
            }
            ProblemConfig::SinSquared(c) => {
                let sp = make_sin_squared(c)?;
                let mut rng = linalg::rng(c.seed ^ 0x5eed);
                let x0 = linalg::gaussian_vec(&mut rng, c.n);
                Self::plain(Some(cfg), Box::new(sp.objective), sp.info, x0, Some(vec![0.0; c.n]))
            }
            ProblemConfig::Tv(c) => {
                let tp = make_tv_denoise(c)?;
                let shape = tp.objective.shape();
                let x0 = tp.objective.noisy().to_vec();
                let mut p = Self::plain(Some(cfg), Box::new(tp.objective), tp.info, x0, Some(tp.x_star));
                p.image_shape = Some(shape);
                p.truth = Some(tp.truth);
                p
            }
        };
        p.info.check()?;
        Ok(p)
    }

    fn plain(
        cfg: Option<&ProblemConfig>,
        objective: Box<dyn Objective>,
        info: SmoothnessInfo,
        x0: Vec<f64>,
        x_star: Option<Vec<f64>>,
    ) -> Self {
        Self { config: cfg.cloned(), objective, info, x0, x_star, row_space: None, image_shape: None, truth: None }
    }

    /// Wraps an arbitrary objective, e.g. one supplied through the C interface.
    pub fn custom(objective: Box<dyn Objective>, info: SmoothnessInfo, x0: Vec<f64>) -> Result<Self> {
        if x0.len() != objective.dim() {
            return config("x0 has the wrong dimension");
        }
        Ok(Self::plain(None, objective, info, x0, None))
    }

    pub fn family(&self) -> &'static str {
        self.config.as_ref().map_or("custom", |c| c.family())
    }

    pub fn objective(&self) -> &dyn Objective {
        &*self.objective
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn v_star(&self) -> Option<f64> {
        self.info.v_star
    }

    pub fn initial_gap(&self) -> Option<f64> {
        self.v_star().map(|v| self.objective.value(&self.x0) - v)
    }

    /// `(V − V*)/(V(x⁰) − V*)`, or `NaN` when `V*` is unknown.
    pub fn relative_objective(&self, v: f64) -> f64 {
        match self.initial_gap() {
            Some(g) if g > 0.0 => (v - self.v_star().unwrap_or(0.0)) / g,
            _ => f64::NAN,
        }
    }

    /// Projection onto the subspace reachable from `x⁰`, identity for full-rank problems.
    pub fn project(&self, u: &mut [f64]) {
        if let Some(vt) = &self.row_space {
            let mut c = vec![0.0; vt.nrows()];
            matvec(vt, u, &mut c);
            matvec_t(vt, &c, u);
        }
    }

    /// Exact sublevel-set diameter for quadratics, measured in the reachable subspace.
    pub fn r0_exact(&self) -> Option<f64> {
        if !self.objective.is_quadratic() || self.info.pl_mu <= 0.0 {
            return None;
        }
        if let Some(vt) = &self.row_space {
            // The starting point must already lie in the reachable subspace.
            let mut p = self.x0.clone();
            self.project(&mut p);
            if linalg::dist(&p, &self.x0) > 1e-12 * (1.0 + linalg::norm(&self.x0)) || vt.nrows() == 0 {
                return None;
            }
        }
        Some(rates::ellipsoid_diameter(self.initial_gap()?, self.info.pl_mu))
    }

    /// Sampled upper estimate of the sublevel-set diameter, centred at the minimiser when known.
    pub fn r0_sampled(&self, samples: usize, seed: u64) -> Result<f64> {
        let center = self.x_star.clone().unwrap_or_else(|| self.x0.clone());
        let level = self.objective.value(&self.x0);
        let project = |u: &mut [f64]| self.project(u);
        let proj: Option<&dyn Fn(&mut [f64])> = if self.row_space.is_some() { Some(&project) } else { None };
        rates::sampled_sublevel_diameter(&*self.objective, &center, level, samples, seed, proj)
    }
}

/// One line per built-in family, for `list-problems`.
pub fn catalogue() -> Vec<(&'static str, &'static str)> {
    vec![
        ("quadratic", "random SPD quadratic ½xᵀHx − bᵀx with eigenvalues spaced in [1/κ, 1]"),
        ("linear", "least squares ½‖Ax − b‖² with singular values spaced in [1/√κ, 1]; optional kernel"),
        ("logistic", "ℓ²-regularised logistic regression, Gaussian features, ±1 labels"),
        ("sin_squared", "nonconvex PŁ function ‖Ax‖² + 3 sin²(⟨c, x⟩) with Ac = c"),
        ("tv", "smoothed total variation denoising of a phantom or grayscale image"),
    ]
}
