//! Smoothed total variation denoising
//! `V(x) = ½‖x − x^δ‖² + λ Σ_p √(|(∇x)_p|² + ε)`
//! with forward differences and Neumann boundary (the difference across the
//! last row or column is zero).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::image;
use crate::discrete_gradient::value_difference;
use crate::error::{config, Result};
use crate::linalg::{self, dot, norm};
use crate::objective::{Direction, LineCursor, Objective, Restriction, SmoothnessInfo};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TvConfig {
    /// Side length of the synthetic phantom; ignored when `image` is set.
    pub size: usize,
    /// Optional 8-bit grayscale PNG or PGM ground truth.
    pub image: Option<PathBuf>,
    pub lambda: f64,
    pub epsilon: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for TvConfig {
    fn default() -> Self {
        Self { size: 64, image: None, lambda: 0.1, epsilon: 1e-4, noise_sigma: 0.1, seed: 0 }
    }
}

/// Piecewise-constant test image built from nested and offset squares, values in `[0, 1]`.
pub fn phantom(size: usize) -> Vec<f64> {
    let s = size as f64;
    let rect = |r: usize, c: usize, r0: f64, r1: f64, c0: f64, c1: f64| {
        let (y, x) = (r as f64 / s, c as f64 / s);
        y >= r0 && y < r1 && x >= c0 && x < c1
    };
    let mut img = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            let mut v = 0.1;
            if rect(r, c, 0.125, 0.875, 0.125, 0.875) {
                v = 0.4;
            }
            if rect(r, c, 0.3, 0.7, 0.3, 0.7) {
                v = 1.0;
            }
            if rect(r, c, 0.17, 0.3, 0.6, 0.8) {
                v = 0.75;
            }
            if rect(r, c, 0.75, 0.83, 0.2, 0.45) {
                v = 0.0;
            }
            img[r * size + c] = v;
        }
    }
    img
}

pub struct TvDenoise {
    rows: usize,
    cols: usize,
    noisy: Vec<f64>,
    lambda: f64,
    eps: f64,
}

impl TvDenoise {
    pub fn new(rows: usize, cols: usize, noisy: Vec<f64>, lambda: f64, eps: f64) -> Result<Self> {
        if rows * cols != noisy.len() || rows == 0 || cols == 0 {
            return config("image shape does not match the data");
        }
        if !(eps > 0.0) {
            return config("epsilon must be positive");
        }
        if !(lambda >= 0.0) {
            return config("lambda must be nonnegative");
        }
        Ok(Self { rows, cols, noisy, lambda, eps })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn noisy(&self) -> &[f64] {
        &self.noisy
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    /// Forward differences at pixel `p`.
    #[inline]
    fn grad_at(&self, x: &[f64], p: usize) -> (f64, f64) {
        let (r, c) = (p / self.cols, p % self.cols);
        let gx = if c + 1 < self.cols { x[p + 1] - x[p] } else { 0.0 };
        let gy = if r + 1 < self.rows { x[p + self.cols] - x[p] } else { 0.0 };
        (gx, gy)
    }

    #[inline]
    fn smooth_norm(&self, gx: f64, gy: f64) -> f64 {
        (gx * gx + gy * gy + self.eps).sqrt()
    }

    /// Adds `Kᵀ w` for the stencil of pixel `p` to `out`.
    #[inline]
    fn scatter(&self, p: usize, wx: f64, wy: f64, out: &mut [f64]) {
        let (r, c) = (p / self.cols, p % self.cols);
        if c + 1 < self.cols {
            out[p] -= wx;
            out[p + 1] += wx;
        }
        if r + 1 < self.rows {
            out[p] -= wy;
            out[p + self.cols] += wy;
        }
    }

    pub fn tv(&self, x: &[f64]) -> f64 {
        (0..x.len())
            .map(|p| {
                let (gx, gy) = self.grad_at(x, p);
                self.smooth_norm(gx, gy)
            })
            .sum()
    }

    /// `∇²V(x) v`
    pub fn hessian_vec(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        let mut tv = vec![0.0; v.len()];
        for p in 0..x.len() {
            let (gx, gy) = self.grad_at(x, p);
            let (vx, vy) = self.grad_at(v, p);
            let n = self.smooth_norm(gx, gy);
            let proj = (gx * vx + gy * vy) / (n * n);
            self.scatter(p, (vx - gx * proj) / n, (vy - gy * proj) / n, &mut tv);
        }
        linalg::axpy(self.lambda, &tv, &mut out);
        out
    }

    /// Terms of the TV sum that depend on pixel `i`: `(p, ∂gx/∂x_i, ∂gy/∂x_i)`.
    fn stencil(&self, i: usize) -> [(usize, f64, f64); 3] {
        let (r, c) = (i / self.cols, i % self.cols);
        let own = (
            i,
            if c + 1 < self.cols { -1.0 } else { 0.0 },
            if r + 1 < self.rows { -1.0 } else { 0.0 },
        );
        let left = if c > 0 { (i - 1, 1.0, 0.0) } else { (usize::MAX, 0.0, 0.0) };
        let up = if r > 0 { (i - self.cols, 0.0, 1.0) } else { (usize::MAX, 0.0, 0.0) };
        [own, left, up]
    }

    /// Largest possible curvature along a coordinate, `1 + 4λ/√ε`.
    pub fn coordinate_bound(&self) -> f64 {
        1.0 + 4.0 * self.lambda / self.eps.sqrt()
    }

    /// Global Lipschitz bound `1 + 8λ/√ε`.
    pub fn lipschitz_bound(&self) -> f64 {
        1.0 + 8.0 * self.lambda / self.eps.sqrt()
    }

    /// Coordinate descent step `1/(2λ√ε + 1)` exactly as commonly quoted for this experiment.
    pub fn tau_cd_printed(&self) -> f64 {
        1.0 / (2.0 * self.lambda * self.eps.sqrt() + 1.0)
    }

    /// Safe coordinate descent step `1/L_i`.
    pub fn tau_cd_safe(&self) -> f64 {
        1.0 / self.coordinate_bound()
    }
}

/// `√(a + d) − √a` with `a = |g|² + ε` and `d` the change of `|g|²`, free of cancellation.
#[inline]
fn sqrt_diff(n0: f64, d: f64) -> f64 {
    let n1 = (n0 * n0 + d).max(0.0).sqrt();
    d / (n1 + n0)
}

impl Objective for TvDenoise {
    fn dim(&self) -> usize {
        self.noisy.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let data: f64 = x.iter().zip(&self.noisy).map(|(a, b)| (a - b) * (a - b)).sum();
        0.5 * data + self.lambda * self.tv(x)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let mut tv = vec![0.0; x.len()];
        for p in 0..x.len() {
            let (gx, gy) = self.grad_at(x, p);
            let n = self.smooth_norm(gx, gy);
            self.scatter(p, gx / n, gy / n, &mut tv);
        }
        for i in 0..x.len() {
            out[i] = x[i] - self.noisy[i] + self.lambda * tv[i];
        }
        Ok(())
    }

    fn partial(&self, i: usize, x: &[f64]) -> Result<f64> {
        let mut s = x[i] - self.noisy[i];
        for (p, ax, ay) in self.stencil(i) {
            if p == usize::MAX {
                continue;
            }
            let (gx, gy) = self.grad_at(x, p);
            s += self.lambda * (ax * gx + ay * gy) / self.smooth_norm(gx, gy);
        }
        Ok(s)
    }

    fn cursor(&self, x: &[f64]) -> Box<dyn LineCursor + '_> {
        Box::new(TvCursor { p: self, x: x.to_vec() })
    }
}

/// Coordinate restrictions touch the three TV terms around one pixel.
struct TvCursor<'a> {
    p: &'a TvDenoise,
    x: Vec<f64>,
}

impl LineCursor for TvCursor<'_> {
    fn point(&self) -> &[f64] {
        &self.x
    }

    fn restrict<'s>(&'s self, dir: Direction<'s>) -> Restriction<'s> {
        let p = self.p;
        match dir {
            Direction::Coord(i) => {
                let r0 = self.x[i] - p.noisy[i];
                let terms: Vec<(f64, f64, f64, f64, f64)> = p
                    .stencil(i)
                    .into_iter()
                    .filter(|s| s.0 != usize::MAX)
                    .map(|(q, ax, ay)| {
                        let (gx, gy) = p.grad_at(&self.x, q);
                        (gx, gy, ax, ay, p.smooth_norm(gx, gy))
                    })
                    .collect();
                Box::new(move |t| {
                    let mut tv = 0.0;
                    for &(gx, gy, ax, ay, n0) in &terms {
                        let d = t * ax * (2.0 * gx + t * ax) + t * ay * (2.0 * gy + t * ay);
                        tv += sqrt_diff(n0, d);
                    }
                    t * r0 + 0.5 * t * t + p.lambda * tv
                })
            }
            Direction::Vector(d) => {
                let n = self.x.len();
                let resid: f64 = (0..n).map(|i| (self.x[i] - p.noisy[i]) * d[i]).sum();
                let dd = dot(d, d);
                let terms: Vec<(f64, f64, f64, f64, f64)> = (0..n)
                    .map(|q| {
                        let (gx, gy) = p.grad_at(&self.x, q);
                        let (hx, hy) = p.grad_at(d, q);
                        (gx, gy, hx, hy, p.smooth_norm(gx, gy))
                    })
                    .collect();
                Box::new(move |t| {
                    let tv: f64 = terms
                        .iter()
                        .map(|&(gx, gy, hx, hy, n0)| {
                            sqrt_diff(n0, t * hx * (2.0 * gx + t * hx) + t * hy * (2.0 * gy + t * hy))
                        })
                        .sum();
                    t * resid + 0.5 * t * t * dd + p.lambda * tv
                })
            }
        }
    }

    fn slope(&self, dir: Direction<'_>) -> Option<f64> {
        match dir {
            Direction::Coord(i) => self.p.partial(i, &self.x).ok(),
            Direction::Vector(d) => self.p.gradient(&self.x).ok().map(|g| dot(&g, d)),
        }
    }

    fn advance(&mut self, dir: Direction<'_>, t: f64) {
        dir.step(&mut self.x, t);
    }
}

/// Truncated Newton with conjugate gradients and backtracking, used for the reference minimum.
pub fn newton_cg(p: &TvDenoise, x0: &[f64], grad_tol: f64, max_newton: usize) -> Result<Vec<f64>> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = p.gradient(&x)?;
    for _ in 0..max_newton {
        let gn = norm(&g);
        if gn <= grad_tol {
            return Ok(x);
        }
        // CG on H s = −g with forcing term min(0.5, √‖g‖).
        let eta = 0.5f64.min(gn.sqrt());
        let mut s = vec![0.0; n];
        let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut d = r.clone();
        let mut rr = dot(&r, &r);
        for _ in 0..2000 {
            if rr.sqrt() <= eta * gn {
                break;
            }
            let hd = p.hessian_vec(&x, &d);
            let alpha = rr / dot(&d, &hd);
            linalg::axpy(alpha, &d, &mut s);
            linalg::axpy(-alpha, &hd, &mut r);
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for (di, ri) in d.iter_mut().zip(&r) {
                *di = ri + beta * *di;
            }
        }
        let slope = dot(&g, &s);
        let mut t = 1.0;
        loop {
            let step: Vec<f64> = s.iter().map(|v| t * v).collect();
            let dv = value_difference(p, &x, &step);
            if dv <= 1e-4 * t * slope {
                linalg::axpy(1.0, &step, &mut x);
                break;
            }
            t *= 0.5;
            if t < 1e-20 {
                return Err(crate::Error::InnerSolver { iterations: 0, residual: gn });
            }
        }
        g = p.gradient(&x)?;
    }
    let gn = norm(&g);
    if gn <= 1e3 * grad_tol {
        Ok(x)
    } else {
        Err(crate::Error::InnerSolver { iterations: max_newton, residual: gn })
    }
}

pub struct TvProblem {
    pub objective: TvDenoise,
    pub info: SmoothnessInfo,
    pub truth: Vec<f64>,
    pub x_star: Vec<f64>,
}

pub fn make_tv_denoise(cfg: &TvConfig) -> Result<TvProblem> {
    let (rows, cols, truth) = match &cfg.image {
        Some(path) => image::load_grayscale(path)?,
        None => {
            if cfg.size < 2 {
                return config("phantom size must be at least 2");
            }
            (cfg.size, cfg.size, phantom(cfg.size))
        }
    };
    if !(cfg.noise_sigma >= 0.0) {
        return config("noise level must be nonnegative");
    }
    let mut rng = linalg::rng(cfg.seed);
    let noise = linalg::gaussian_vec(&mut rng, rows * cols);
    let noisy: Vec<f64> = truth.iter().zip(&noise).map(|(t, e)| t + cfg.noise_sigma * e).collect();
    let objective = TvDenoise::new(rows, cols, noisy, cfg.lambda, cfg.epsilon)?;
    let n = rows * cols;
    let l = objective.lipschitz_bound();
    let lc = objective.coordinate_bound();
    let x_star = newton_cg(&objective, objective.noisy(), 1e-9 * (n as f64).sqrt(), 500)?;
    let v_star = objective.value(&x_star);
    let info = SmoothnessInfo::new(l, vec![l; n], vec![lc; n], 1.0, 1.0, true, Some(v_star));
    Ok(TvProblem { objective, info, truth, x_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{finite_difference_gradient, validate_smoothness_around};
    use approx::assert_relative_eq;

    fn small(eps: f64) -> TvDenoise {
        let img = phantom(12);
        let mut rng = linalg::rng(2);
        let noisy: Vec<f64> = img.iter().zip(linalg::gaussian_vec(&mut rng, 144)).map(|(a, e)| a + 0.1 * e).collect();
        TvDenoise::new(12, 12, noisy, 0.1, eps).unwrap()
    }

    #[test]
    fn constant_image_is_its_own_minimiser() {
        let p = TvDenoise::new(5, 4, vec![0.3; 20], 0.7, 1e-2).unwrap();
        assert!(norm(&p.gradient(&[0.3; 20]).unwrap()) == 0.0);
        assert_relative_eq!(p.value(&[0.3; 20]), 0.7 * 20.0 * 0.1, max_relative = 1e-14);
    }

    #[test]
    fn zero_lambda_minimum_is_the_data() {
        let p = TvDenoise::new(3, 3, (0..9).map(|i| i as f64).collect(), 0.0, 1.0).unwrap();
        let x: Vec<f64> = (0..9).map(|i| i as f64).collect();
        assert_eq!(p.value(&x), 0.0);
    }

    #[test]
    fn gradient_partials_and_hessian_match_differences() {
        let p = small(1e-2);
        let x: Vec<f64> = p.noisy().to_vec();
        let g = p.gradient(&x).unwrap();
        let fd = finite_difference_gradient(&p, &x, 1e-6).unwrap();
        for i in 0..x.len() {
            assert!((g[i] - fd[i]).abs() < 1e-6, "{i}");
            assert_relative_eq!(p.partial(i, &x).unwrap(), g[i], max_relative = 1e-12, epsilon = 1e-14);
        }
        let v: Vec<f64> = (0..144).map(|i| (i as f64 * 0.37).cos()).collect();
        let hv = p.hessian_vec(&x, &v);
        let h = 1e-6;
        let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let (gp, gm) = (p.gradient(&xp).unwrap(), p.gradient(&xm).unwrap());
        for i in 0..144 {
            assert!((hv[i] - (gp[i] - gm[i]) / (2.0 * h)).abs() < 1e-5);
        }
    }

    #[test]
    fn cursor_restrictions_match_values() {
        let p = small(1e-4);
        let x = p.noisy().to_vec();
        let c = p.cursor(&x);
        for i in [0, 5, 11, 12, 77, 143] {
            for t in [1e-3, 0.5, -2.0] {
                let mut y = x.clone();
                y[i] += t;
                let f = c.restrict(Direction::Coord(i));
                assert_relative_eq!(f(t), p.value(&y) - p.value(&x), max_relative = 1e-9, epsilon = 1e-12);
            }
        }
        let d: Vec<f64> = (0..144).map(|i| (i as f64).sin()).collect();
        let f = c.restrict(Direction::Vector(&d));
        let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + 0.3 * b).collect();
        assert_relative_eq!(f(0.3), p.value(&y) - p.value(&x), max_relative = 1e-9);
    }

    #[test]
    fn advertised_constants_hold() {
        let p = small(1e-3);
        let info = SmoothnessInfo::new(
            p.lipschitz_bound(),
            vec![p.lipschitz_bound(); 144],
            vec![p.coordinate_bound(); 144],
            1.0,
            1.0,
            true,
            None,
        );
        validate_smoothness_around(&p, &info, p.noisy(), 0.3, 50, 1).unwrap();
        info.check().unwrap();
    }

    #[test]
    fn reference_minimiser_is_stationary() {
        let prob = make_tv_denoise(&TvConfig { size: 16, epsilon: 1e-4, seed: 3, ..Default::default() }).unwrap();
        let g = prob.objective.gradient(&prob.x_star).unwrap();
        assert!(norm(&g) < 1e-6);
        assert!(prob.info.v_star.unwrap() < prob.objective.value(prob.objective.noisy()));
    }

    #[test]
    fn printed_and_safe_steps() {
        let p = TvDenoise::new(2, 2, vec![0.0; 4], 0.1, 1e-4).unwrap();
        assert_relative_eq!(p.tau_cd_printed(), 1.0 / 1.002, max_relative = 1e-14);
        assert_relative_eq!(p.tau_cd_safe(), 1.0 / 41.0, max_relative = 1e-14);
    }
}
