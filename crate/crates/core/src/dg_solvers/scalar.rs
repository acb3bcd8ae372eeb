//! Scalar Itoh–Abe equation `α² + τ f(α) = 0` with `f(α) = V(x − α d) − V(x)`.

use super::InnerSolverConfig;
use crate::error::{config, Result};
use crate::linalg::norm;
use crate::objective::{Direction, Objective};

/// Relative tolerance of the bracketed root.
pub const ROOT_RTOL: f64 = 1e-12;
/// Cap on bracket doublings.
pub const MAX_DOUBLINGS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarSolve {
    /// Displacement: the new point is `x − α d`.
    pub alpha: f64,
    /// Restriction evaluations used.
    pub evals: usize,
    /// No sign change was found; `alpha` fell back to zero.
    pub bracket_failed: bool,
}

/// Root of `h(α) = α + τ δ(−α)/α` nearest to zero on the descent side.
///
/// `delta(t) = V(x + t d) − V(x)` and `slope = ⟨∇V(x), d⟩`. The bracket starts
/// at the explicit Euler displacement `τ·slope`, doubles until `h` changes sign
/// and is then refined with Brent's method. A zero slope returns `α = 0`.
///
/// Without a slope the directional derivative is estimated by central
/// differences. When the estimate is indistinguishable from its truncation
/// error, the nonzero root closest to the origin (positive side first) is
/// returned instead.
pub fn scalar_root(delta: &dyn Fn(f64) -> f64, slope: Option<f64>, tau: f64, max_iter: usize) -> ScalarSolve {
    let h = |a: f64| a + tau * delta(-a) / a;
    let s = match slope {
        Some(s) => s,
        None => {
            let fd = 1e-7;
            let s1 = (delta(fd) - delta(-fd)) / (2.0 * fd);
            let s2 = (delta(2.0 * fd) - delta(-2.0 * fd)) / (4.0 * fd);
            if s1.abs() <= 2.0 * (s1 - s2).abs() {
                // The slope is not resolved by differencing: look for a nonzero root on either side.
                return unresolved_slope_root(&h, fd, max_iter, 4);
            }
            let mut sol = descent_root(&h, s1, tau, max_iter);
            sol.evals += 4;
            return sol;
        }
    };
    descent_root(&h, s, tau, max_iter)
}

fn descent_root(h: &dyn Fn(f64) -> f64, s: f64, tau: f64, max_iter: usize) -> ScalarSolve {
    if s == 0.0 || !s.is_finite() {
        return ScalarSolve { alpha: 0.0, evals: 0, bracket_failed: !s.is_finite() };
    }
    let mut evals = 0;
    let mut a = 0.0;
    let mut fa = -tau * s;
    let mut b = tau * s;
    let mut fb = h(b);
    evals += 1;
    let mut doublings = 0;
    while fb.is_finite() && fa * fb > 0.0 {
        if doublings == MAX_DOUBLINGS {
            return ScalarSolve { alpha: 0.0, evals, bracket_failed: true };
        }
        a = b;
        fa = fb;
        b *= 2.0;
        fb = h(b);
        evals += 1;
        doublings += 1;
    }
    if fb == 0.0 {
        return ScalarSolve { alpha: b, evals, bracket_failed: false };
    }
    if !(fa * fb < 0.0) {
        return ScalarSolve { alpha: 0.0, evals, bracket_failed: true };
    }
    let (alpha, used) = brent(h, a, b, fa, fb, max_iter.max(100));
    ScalarSolve { alpha, evals: evals + used, bracket_failed: false }
}

/// Scans `±start·2^k` for a sign change of `h`, positive side first; `α = 0` if none exists.
fn unresolved_slope_root(h: &dyn Fn(f64) -> f64, start: f64, max_iter: usize, mut evals: usize) -> ScalarSolve {
    for sign in [1.0, -1.0] {
        let mut a = sign * start;
        let mut fa = h(a);
        evals += 1;
        for _ in 0..MAX_DOUBLINGS {
            let b = 2.0 * a;
            let fb = h(b);
            evals += 1;
            if !fb.is_finite() {
                break;
            }
            if fb == 0.0 {
                return ScalarSolve { alpha: b, evals, bracket_failed: false };
            }
            if fa * fb < 0.0 {
                let (alpha, used) = brent(h, a, b, fa, fb, max_iter.max(100));
                return ScalarSolve { alpha, evals: evals + used, bracket_failed: false };
            }
            a = b;
            fa = fb;
        }
    }
    ScalarSolve { alpha: 0.0, evals, bracket_failed: false }
}

/// Brent's method on a bracket with `fa·fb < 0`; returns the root and the evaluations used.
fn brent(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, max_iter: usize) -> (f64, usize) {
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    let mut evals = 0;
    for _ in 0..max_iter {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * ROOT_RTOL * b.abs();
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return (b, evals);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        evals += 1;
    }
    (b, evals)
}

/// One Itoh–Abe step along a unit direction.
#[derive(Clone, Debug)]
pub struct ScalarStep {
    pub alpha: f64,
    pub y: Vec<f64>,
    pub evals: usize,
    pub bracket_failed: bool,
}

/// Solves the scalar discrete gradient equation along `d` and returns `y = x − α d`.
pub fn solve_itoh_abe_scalar(
    obj: &dyn Objective,
    x: &[f64],
    d: &[f64],
    tau: f64,
    cfg: &InnerSolverConfig,
) -> Result<ScalarStep> {
    if (norm(d) - 1.0).abs() > 1e-8 {
        return config("direction must be a unit vector");
    }
    if !(tau > 0.0) {
        return config("time step must be positive");
    }
    let cursor = obj.cursor(x);
    let dir = Direction::Vector(d);
    let delta = cursor.restrict(dir);
    let sol = scalar_root(&*delta, cursor.slope(dir), tau, cfg.max_iter);
    let y = x.iter().zip(d).map(|(xi, di)| xi - sol.alpha * di).collect();
    Ok(ScalarStep { alpha: sol.alpha, y, evals: sol.evals + 1, bracket_failed: sol.bracket_failed })
}
