use std::ffi::{c_void, CString};
use std::ptr;

use dgm_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0u8; 256];
    let n = unsafe { dgm_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    buf.truncate(n.min(255));
    String::from_utf8(buf).unwrap()
}

fn problem(json: &str) -> *mut DgmProblem {
    let json = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { dgm_problem_from_json(json.as_ptr(), &mut p) }, DgmStatus::Ok, "{}", last_error());
    p
}

fn solve(p: *const DgmProblem, method: &str, iterations: usize) -> Result<*mut DgmTrace, DgmStatus> {
    let method = CString::new(method).unwrap();
    let mut t = ptr::null_mut();
    match unsafe { dgm_solve(p, method.as_ptr(), iterations, 7, &mut t) } {
        DgmStatus::Ok => Ok(t),
        s => Err(s),
    }
}

fn objectives(t: *const DgmTrace) -> Vec<f64> {
    let n = unsafe { dgm_trace_len(t) };
    let mut v = vec![0.0; n];
    assert_eq!(unsafe { dgm_trace_objectives(t, v.as_mut_ptr(), n) }, DgmStatus::Ok);
    v
}

const QUADRATIC: &str = r#"{"family": "quadratic", "n": 6, "kappa": 10.0, "seed": 3}"#;
const ITOH_ABE: &str = r#"{"method": "discrete_gradient", "scheme": {"kind": "itoh_abe"}, "policy": {"kind": "coordinate_scaled", "factor": 2.0}}"#;

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { std::ffi::CStr::from_ptr(dgm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn json_problem_round_trips_values_and_gradients() {
    let p = problem(QUADRATIC);
    let mut n = 0;
    assert_eq!(unsafe { dgm_problem_dim(p, &mut n) }, DgmStatus::Ok);
    assert_eq!(n, 6);
    let mut x0 = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut v = 0.0;
    unsafe {
        assert_eq!(dgm_problem_x0(p, x0.as_mut_ptr(), n), DgmStatus::Ok);
        assert_eq!(dgm_problem_value(p, x0.as_ptr(), n, &mut v), DgmStatus::Ok);
        assert_eq!(dgm_problem_gradient(p, x0.as_ptr(), g.as_mut_ptr(), n), DgmStatus::Ok);
    }
    // Central difference along the first coordinate matches the gradient.
    let h = 1e-6;
    let (mut plus, mut minus) = (x0.clone(), x0.clone());
    plus[0] += h;
    minus[0] -= h;
    let (mut vp, mut vm) = (0.0, 0.0);
    unsafe {
        dgm_problem_value(p, plus.as_ptr(), n, &mut vp);
        dgm_problem_value(p, minus.as_ptr(), n, &mut vm);
        dgm_problem_free(p);
    }
    assert!(v.is_finite());
    assert!(((vp - vm) / (2.0 * h) - g[0]).abs() <= 1e-5 * (1.0 + g[0].abs()));
}

#[test]
fn itoh_abe_run_decreases_monotonically() {
    let p = problem(QUADRATIC);
    let t = solve(p, ITOH_ABE, 30).unwrap();
    assert_eq!(unsafe { dgm_trace_status(t) }, DgmStatus::Ok);
    let v = objectives(t);
    assert_eq!(v.len(), 31);
    assert!(v.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs()));
    let mut x = vec![0.0; 6];
    assert_eq!(unsafe { dgm_trace_final_point(t, x.as_mut_ptr(), 6) }, DgmStatus::Ok);
    let mut fx = 0.0;
    assert_eq!(unsafe { dgm_problem_value(p, x.as_ptr(), 6, &mut fx) }, DgmStatus::Ok);
    assert_eq!(fx, *v.last().unwrap());
    unsafe {
        dgm_trace_free(t);
        dgm_problem_free(p);
    }
}

unsafe extern "C" fn shifted_value(x: *const f64, n: usize, data: *mut c_void) -> f64 {
    let c = *(data as *const f64);
    std::slice::from_raw_parts(x, n).iter().map(|a| 0.5 * (a - c) * (a - c)).sum()
}

unsafe extern "C" fn shifted_gradient(x: *const f64, g: *mut f64, n: usize, data: *mut c_void) {
    let c = *(data as *const f64);
    for i in 0..n {
        *g.add(i) = *x.add(i) - c;
    }
}

fn callback_problem(gradient: DgmGradientFn, centre: &mut f64) -> *mut DgmProblem {
    let x0 = [0.0; 4];
    let mut p = ptr::null_mut();
    let status = unsafe {
        dgm_problem_from_callbacks(
            4,
            Some(shifted_value),
            gradient,
            (centre as *mut f64).cast(),
            x0.as_ptr(),
            1.0,
            1.0,
            true,
            &mut p,
        )
    };
    assert_eq!(status, DgmStatus::Ok, "{}", last_error());
    p
}

#[test]
fn callback_problem_is_solved_by_gonzalez_and_itoh_abe() {
    let mut centre = 3.0;
    let p = callback_problem(Some(shifted_gradient), &mut centre);
    for method in [
        r#"{"method": "discrete_gradient", "scheme": {"kind": "gonzalez"}, "policy": {"kind": "lipschitz_scaled", "factor": 2.0}}"#,
        ITOH_ABE,
    ] {
        let t = solve(p, method, 60).unwrap();
        let mut x = [0.0; 4];
        assert_eq!(unsafe { dgm_trace_final_point(t, x.as_mut_ptr(), 4) }, DgmStatus::Ok);
        assert!(x.iter().all(|a| (a - 3.0).abs() < 1e-6), "{method}: {x:?}");
        unsafe { dgm_trace_free(t) };
    }
    unsafe { dgm_problem_free(p) };
}

#[test]
fn value_only_callbacks_reject_gradient_methods() {
    let mut centre = 1.0;
    let p = callback_problem(None, &mut centre);
    let gd = r#"{"method": "gradient_descent", "policy": {"kind": "lipschitz_scaled", "factor": 1.0}}"#;
    assert_eq!(solve(p, gd, 5).unwrap_err(), DgmStatus::Config);
    assert!(last_error().contains("gradient"), "{}", last_error());
    let t = solve(p, ITOH_ABE, 20).unwrap();
    assert_eq!(unsafe { dgm_trace_status(t) }, DgmStatus::Ok);
    unsafe {
        dgm_trace_free(t);
        dgm_problem_free(p);
    }
}

#[test]
fn null_pointers_and_bad_input_are_reported() {
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(dgm_problem_from_json(ptr::null(), &mut out), DgmStatus::NullPointer);
        assert!(out.is_null());
        let bad = CString::new("{\"family\": \"nope\"}").unwrap();
        assert_eq!(dgm_problem_from_json(bad.as_ptr(), &mut out), DgmStatus::Config);
        let neg = CString::new(r#"{"family": "quadratic", "n": 4, "kappa": -1.0, "seed": 0}"#).unwrap();
        assert_eq!(dgm_problem_from_json(neg.as_ptr(), &mut out), DgmStatus::Config);
        assert!(!last_error().is_empty());
        assert_eq!(dgm_trace_status(ptr::null()), DgmStatus::NullPointer);
        assert_eq!(dgm_trace_len(ptr::null()), 0);
        dgm_problem_free(ptr::null_mut());
        dgm_trace_free(ptr::null_mut());
        let x0 = [0.0; 2];
        let status = dgm_problem_from_callbacks(2, None, None, ptr::null_mut(), x0.as_ptr(), 1.0, 0.0, true, &mut out);
        assert_eq!(status, DgmStatus::NullPointer);
        let status = dgm_problem_from_callbacks(2, Some(shifted_value), None, ptr::null_mut(), x0.as_ptr(), 1.0, 2.0, true, &mut out);
        assert_eq!(status, DgmStatus::InvalidArgument);
    }
    let p = problem(QUADRATIC);
    let mut x = [0.0; 3];
    assert_eq!(unsafe { dgm_problem_x0(p, x.as_mut_ptr(), 3) }, DgmStatus::InvalidArgument);
    assert!(last_error().contains("expected 6"));
    assert_eq!(solve(p, "{", 3).unwrap_err(), DgmStatus::Config);
    unsafe { dgm_problem_free(p) };
}

#[test]
fn error_message_is_truncated_to_the_buffer() {
    let mut out = ptr::null_mut();
    unsafe { dgm_problem_from_json(ptr::null(), &mut out) };
    let mut buf = [0x7fu8; 5];
    let full = unsafe { dgm_last_error_message(buf.as_mut_ptr().cast(), buf.len()) };
    assert!(full > 4);
    assert_eq!(buf[4], 0);
    assert_eq!(&buf[..4], &b"json is null"[..4]);
}

unsafe extern "C" fn nan_value(_: *const f64, _: usize, _: *mut c_void) -> f64 {
    f64::NAN
}

#[test]
fn non_finite_callbacks_surface_as_errors() {
    let x0 = [1.0; 3];
    let mut p = ptr::null_mut();
    let status = unsafe {
        dgm_problem_from_callbacks(3, Some(nan_value), None, ptr::null_mut(), x0.as_ptr(), 1.0, 0.0, false, &mut p)
    };
    assert_eq!(status, DgmStatus::Ok);
    match solve(p, ITOH_ABE, 5) {
        Ok(t) => {
            assert_ne!(unsafe { dgm_trace_status(t) }, DgmStatus::Ok);
            unsafe { dgm_trace_free(t) };
        }
        Err(s) => assert!(matches!(s, DgmStatus::Evaluation | DgmStatus::Config), "{s:?}"),
    }
    unsafe { dgm_problem_free(p) };
}

#[test]
fn experiments_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = CString::new(
        r#"{"problem": {"family": "quadratic", "n": 5, "kappa": 10.0, "seed": 1},
            "methods": [{"method": "discrete_gradient", "scheme": {"kind": "itoh_abe"}, "policy": {"kind": "coordinate_scaled", "factor": 2.0}}],
            "iterations": 5, "seeds": [0, 1]}"#,
    )
    .unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { dgm_run_experiment(spec.as_ptr(), out.as_ptr()) }, DgmStatus::Ok, "{}", last_error());
    assert!(dir.path().join("summary.json").is_file());
    assert!(dir.path().join("itoh_abe").join("seed_1.csv").is_file());
}
