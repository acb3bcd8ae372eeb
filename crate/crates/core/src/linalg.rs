//! Small dense-vector helpers shared by the solvers.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

/// Seeded generator used everywhere a reproducible random stream is needed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniformly distributed point on the unit sphere, drawn by normalising a Gaussian vector.
pub fn unit_sphere(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, n);
        let r = norm(&v);
        if r > 1e-300 {
            return scaled(&v, 1.0 / r);
        }
    }
}

/// Column `j` of a column-major dense matrix as a contiguous slice.
#[inline]
pub fn column(m: &DMatrix<f64>, j: usize) -> &[f64] {
    let r = m.nrows();
    &m.as_slice()[j * r..(j + 1) * r]
}

/// `y = M x` for a column-major dense matrix.
pub fn matvec(m: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(m.ncols(), x.len());
    debug_assert_eq!(m.nrows(), y.len());
    y.iter_mut().for_each(|v| *v = 0.0);
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0.0 {
            axpy(xj, m.column(j).as_slice(), y);
        }
    }
}

/// `y = Mᵀ x` for a column-major dense matrix.
pub fn matvec_t(m: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(m.nrows(), x.len());
    debug_assert_eq!(m.ncols(), y.len());
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = dot(m.column(j).as_slice(), x);
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite operator, by power iteration.
pub fn power_iteration(
    n: usize,
    apply: impl Fn(&[f64], &mut [f64]),
    iters: usize,
    seed: u64,
) -> f64 {
    let mut r = rng(seed);
    let mut v = unit_sphere(&mut r, n);
    let mut w = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..iters {
        apply(&v, &mut w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        lambda = dot(&v, &w);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
    }
    lambda
}
