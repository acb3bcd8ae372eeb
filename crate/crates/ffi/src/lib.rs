//! C interface to `dgm`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every entry point returns a
//! [`DgmStatus`]; on failure a message is available from
//! [`dgm_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::slice;

use dgm::harness::{run, ExperimentSpec, Method, RunOptions};
use dgm::objective::{FnObjective, SmoothnessInfo};
use dgm::optimizer::{StoppingRule, Trace, TraceStatus};
use dgm::problems::{Problem, ProblemConfig};
use dgm::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DgmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Evaluation = 4,
    InnerSolverFailed = 5,
    Diverged = 6,
    Io = 7,
    Panic = 8,
}

/// Optimisation problem handle.
pub struct DgmProblem {
    inner: Problem,
}

/// Result of a single optimisation run.
pub struct DgmTrace {
    inner: Trace,
}

/// Objective value at `x[0..n]`.
pub type DgmValueFn = Option<unsafe extern "C" fn(x: *const f64, n: usize, user_data: *mut c_void) -> f64>;

/// Writes the gradient at `x[0..n]` into `grad[0..n]`.
pub type DgmGradientFn =
    Option<unsafe extern "C" fn(x: *const f64, grad: *mut f64, n: usize, user_data: *mut c_void)>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(DgmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::Json(_) | Error::Metadata { .. } | Error::GradientUnavailable => DgmStatus::Config,
            Error::Evaluation { .. } => DgmStatus::Evaluation,
            Error::InnerSolver { .. } => DgmStatus::InnerSolverFailed,
            _ => DgmStatus::Io,
        };
        Failure(code, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DgmStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DgmStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DgmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DgmStatus::Ok,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            DgmStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn input<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn output<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, n))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn check_len(got: usize, want: usize, what: &str) -> Result<(), Failure> {
    if got != want {
        return Err(invalid(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

unsafe fn store<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dgm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (always
/// NUL-terminated when `cap > 0`) and returns the full message length.
/// Returns 0 if no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dgm_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let k = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, k);
            *buf.add(k) = 0;
        }
        bytes.len()
    })
}

/// Builds one of the built-in problem families from a JSON object such as
/// `{"family": "quadratic", "n": 50, "kappa": 100, "seed": 0}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_problem_from_json(json: *const c_char, out: *mut *mut DgmProblem) -> DgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg: ProblemConfig = serde_json::from_str(text(json, "json")?).map_err(Error::from)?;
        store(out, DgmProblem { inner: cfg.build()? });
        Ok(())
    })
}

struct Callbacks {
    value: unsafe extern "C" fn(*const f64, usize, *mut c_void) -> f64,
    gradient: DgmGradientFn,
    user_data: *mut c_void,
}

// The caller promises the callbacks and `user_data` may be used from any thread.
unsafe impl Send for Callbacks {}
unsafe impl Sync for Callbacks {}

/// Builds a problem from user callbacks. `gradient` may be null, in which
/// case only derivative-free methods (Itoh–Abe variants) can run. `lipschitz`
/// bounds the gradient's Lipschitz constant and `mu` is the strong convexity
/// constant (0 if unknown); both drive the step-size policies.
///
/// # Safety
/// `x0` must point to `dim` values and `out` must be valid. The callbacks and
/// `user_data` must remain valid, and be safe to call from any thread, until
/// the problem is freed.
#[no_mangle]
pub unsafe extern "C" fn dgm_problem_from_callbacks(
    dim: usize,
    value: DgmValueFn,
    gradient: DgmGradientFn,
    user_data: *mut c_void,
    x0: *const f64,
    lipschitz: f64,
    mu: f64,
    convex: bool,
    out: *mut *mut DgmProblem,
) -> DgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let value = value.ok_or_else(|| null("value"))?;
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        if !(lipschitz.is_finite() && lipschitz > 0.0) || !(mu.is_finite() && mu >= 0.0 && mu <= lipschitz) {
            return Err(invalid("need 0 <= mu <= lipschitz with lipschitz finite and positive"));
        }
        let x0 = input(x0, dim, "x0")?.to_vec();
        let cb = std::sync::Arc::new(Callbacks { value, gradient, user_data });
        let v = cb.clone();
        let value = move |x: &[f64]| unsafe { (v.value)(x.as_ptr(), x.len(), v.user_data) };
        let objective = match gradient {
            Some(_) => FnObjective::new(dim, value, move |x: &[f64], g: &mut [f64]| unsafe {
                if let Some(grad) = cb.gradient {
                    grad(x.as_ptr(), g.as_mut_ptr(), x.len(), cb.user_data);
                }
            }),
            None => FnObjective::value_only(dim, value),
        };
        let info = SmoothnessInfo::new(lipschitz, vec![lipschitz; dim], vec![lipschitz; dim], mu, mu, convex, None);
        store(out, DgmProblem { inner: Problem::custom(Box::new(objective), info, x0)? });
        Ok(())
    })
}

/// # Safety
/// `problem` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dgm_problem_free(problem: *mut DgmProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// `problem` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_problem_dim(problem: *const DgmProblem, out: *mut usize) -> DgmStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        *out.as_mut().ok_or_else(|| null("out"))? = p.inner.dim();
        Ok(())
    })
}

/// Copies the starting point into `out[0..n]`; `n` must equal the dimension.
///
/// # Safety
/// `problem` must be a live handle and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn dgm_problem_x0(problem: *const DgmProblem, out: *mut f64, n: usize) -> DgmStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        check_len(n, p.inner.dim(), "out")?;
        output(out, n, "out")?.copy_from_slice(&p.inner.x0);
        Ok(())
    })
}

/// # Safety
/// `problem` must be a live handle, `x` must point to `n` doubles and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn dgm_problem_value(problem: *const DgmProblem, x: *const f64, n: usize, out: *mut f64) -> DgmStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        check_len(n, p.inner.dim(), "x")?;
        let v = p.inner.objective().value(input(x, n, "x")?);
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// # Safety
/// `problem` must be a live handle; `x` and `grad` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn dgm_problem_gradient(
    problem: *const DgmProblem,
    x: *const f64,
    grad: *mut f64,
    n: usize,
) -> DgmStatus {
    guard(|| {
        let p = handle(problem, "problem")?;
        check_len(n, p.inner.dim(), "x")?;
        let g = p.inner.objective().gradient(input(x, n, "x")?)?;
        output(grad, n, "grad")?.copy_from_slice(&g);
        Ok(())
    })
}

/// Runs one method, described as JSON, for at most `iterations` steps, e.g.
/// `{"method": "discrete_gradient", "scheme": {"kind": "itoh_abe"},
/// "policy": {"kind": "coordinate_scaled", "factor": 2.0}}`. A run that stops early still yields a trace;
/// inspect it with [`dgm_trace_status`].
///
/// # Safety
/// `problem` must be a live handle, `method_json` a NUL-terminated string
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_solve(
    problem: *const DgmProblem,
    method_json: *const c_char,
    iterations: usize,
    seed: u64,
    out: *mut *mut DgmTrace,
) -> DgmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = handle(problem, "problem")?;
        let method: Method = serde_json::from_str(text(method_json, "method_json")?).map_err(Error::from)?;
        let trace = method.execute(&p.inner, StoppingRule::iterations(iterations), seed)?;
        store(out, DgmTrace { inner: trace });
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dgm_trace_free(trace: *mut DgmTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of recorded iterates, including the starting point.
///
/// # Safety
/// `trace` must be null or a live handle. Null yields 0.
#[no_mangle]
pub unsafe extern "C" fn dgm_trace_len(trace: *const DgmTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.inner.records.len())
}

/// How the run ended: `Ok` if it completed or converged, otherwise the
/// reason it stopped early.
///
/// # Safety
/// `trace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dgm_trace_status(trace: *const DgmTrace) -> DgmStatus {
    let Some(t) = trace.as_ref() else {
        set_error("trace is null");
        return DgmStatus::NullPointer;
    };
    match t.inner.status {
        TraceStatus::MaxIterations | TraceStatus::Converged => DgmStatus::Ok,
        TraceStatus::InnerSolverFailed { .. } => DgmStatus::InnerSolverFailed,
        TraceStatus::Diverged { .. } | TraceStatus::LineSearchFailed { .. } => DgmStatus::Diverged,
    }
}

/// Copies the objective values `V(x_0), …` into `out[0..n]`, where `n`
/// must equal [`dgm_trace_len`].
///
/// # Safety
/// `trace` must be a live handle and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn dgm_trace_objectives(trace: *const DgmTrace, out: *mut f64, n: usize) -> DgmStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        check_len(n, t.inner.records.len(), "out")?;
        output(out, n, "out")?.copy_from_slice(&t.inner.objectives());
        Ok(())
    })
}

/// Copies the final iterate into `out[0..n]`; `n` must equal the dimension.
///
/// # Safety
/// `trace` must be a live handle and `out` must point to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn dgm_trace_final_point(trace: *const DgmTrace, out: *mut f64, n: usize) -> DgmStatus {
    guard(|| {
        let t = handle(trace, "trace")?;
        check_len(n, t.inner.x.len(), "out")?;
        output(out, n, "out")?.copy_from_slice(&t.inner.x);
        Ok(())
    })
}

/// Runs a full experiment from its JSON description and writes traces,
/// aggregates and a summary under `out_dir`.
///
/// # Safety
/// Both arguments must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn dgm_run_experiment(spec_json: *const c_char, out_dir: *const c_char) -> DgmStatus {
    guard(|| {
        let spec = ExperimentSpec::from_json(text(spec_json, "spec_json")?)?;
        let out = PathBuf::from(text(out_dir, "out_dir")?);
        run(&spec, &RunOptions { out: Some(out), ..Default::default() })?;
        Ok(())
    })
}
