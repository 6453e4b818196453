//! C interface to the habitat toolkit.
//!
//! Every fallible call returns a [`HabStatus`]; on failure the message is
//! available from [`hab_last_error`] until the next failing call on the same
//! thread. Objects are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use habitat::envelope::{build_envelope, classify_shift, EnvelopeBound, EnvelopeOptions};
use habitat::fem::{self, FemOptions, SolutionField};
use habitat::oracle::{step_solver, OracleOptions, OracleRun};
use habitat::spectral::{bounds_thm21, classify_fixed, floquet_lambda, FloquetOptions, Verdict};
use habitat::{parse_scenario, recipes, Error, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HabVerdict {
    Extinct = 0,
    Survive = 1,
    Unknown = 2,
}

impl From<Verdict> for HabVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Extinct => HabVerdict::Extinct,
            Verdict::Survive => HabVerdict::Survive,
            Verdict::Unknown => HabVerdict::Unknown,
        }
    }
}

/// A validated scenario.
pub struct HabScenario(Scenario);

/// A finite element solution.
pub struct HabFemSolution(SolutionField);

/// A finite-difference reference run.
pub struct HabOracleRun(OracleRun);

/// Sub/supersolution envelope.
pub struct HabEnvelope(EnvelopeBound);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(e: &Error) -> HabStatus {
    match e {
        _ if e.is_validation() => HabStatus::Validation,
        Error::Io(_) | Error::Csv(_) => HabStatus::Io,
        _ => HabStatus::Numerical,
    }
}

struct Fail(HabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HabStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(HabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(HabStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the most recent failure on this thread (empty if none). The
/// pointer stays valid until the next failing call on the thread.
#[no_mangle]
pub extern "C" fn hab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and validates a JSON scenario.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_scenario_from_json(json: *const c_char, out: *mut *mut HabScenario) -> HabStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let s = parse_scenario(text)?;
        write(out, Box::into_raw(Box::new(HabScenario(s))), "out")
    })
}

/// Loads a bundled scenario such as `"ex4-6"`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_scenario_bundled(name: *const c_char, out: *mut *mut HabScenario) -> HabStatus {
    guard(|| {
        let name = read_str(name, "name")?;
        let s = recipes::bundled(name)?;
        write(out, Box::into_raw(Box::new(HabScenario(s))), "out")
    })
}

/// # Safety
/// `s` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hab_scenario_free(s: *mut HabScenario) {
    free(s)
}

/// Final time of the scenario.
///
/// # Safety
/// `s` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_scenario_horizon(s: *const HabScenario, out: *mut f64) -> HabStatus {
    guard(|| write(out, deref(s, "scenario")?.0.horizon, "out"))
}

/// Closed-form eigenvalue bounds on the fixed domain `(0, length)`.
///
/// # Safety
/// `s` must be a valid handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_eigen_bounds(
    s: *const HabScenario,
    length: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> HabStatus {
    guard(|| {
        let s = &deref(s, "scenario")?.0;
        let b = bounds_thm21(&s.frozen(length), length)?;
        write(lower, b.lower, "lower")?;
        write(upper, b.upper, "upper")
    })
}

/// Periodic principal eigenvalue on `(0, length)`; zero `nodes` or `steps`
/// select the defaults.
///
/// # Safety
/// `s` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_floquet_lambda(
    s: *const HabScenario,
    length: f64,
    nodes: usize,
    steps: usize,
    out: *mut f64,
) -> HabStatus {
    guard(|| {
        let s = &deref(s, "scenario")?.0;
        let mut o = FloquetOptions::default();
        if nodes > 0 {
            o.nodes = nodes;
        }
        if steps > 0 {
            o.steps = steps;
        }
        let sol = floquet_lambda(s, length, &o)?;
        write(out, sol.lambda, "out")
    })
}

/// Verdict of the closed-form criteria for length `length` and rate `r`.
///
/// # Safety
/// `s` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_classify_fixed(
    s: *const HabScenario,
    length: f64,
    r: f64,
    out: *mut HabVerdict,
) -> HabStatus {
    guard(|| {
        let s = &deref(s, "scenario")?.0;
        let c = classify_fixed(&s.frozen(length), length, r)?;
        write(out, c.verdict.into(), "out")
    })
}

/// Long-time verdict for the shift `c(t0 + t)^exponent` given the
/// fixed-domain eigenvalue; `|lambda| <= tol` counts as zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_classify_shift(
    c: f64,
    exponent: f64,
    d: f64,
    lambda: f64,
    tol: f64,
    out: *mut HabVerdict,
) -> HabStatus {
    guard(|| write(out, classify_shift(c, exponent, d, lambda, tol).verdict.into(), "out"))
}

/// Space-time FEM solve; nonpositive `theta` or `delta` select the defaults.
///
/// # Safety
/// `s` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_fem_solve(
    s: *const HabScenario,
    nt: usize,
    nx: usize,
    theta: f64,
    delta: f64,
    out: *mut *mut HabFemSolution,
) -> HabStatus {
    guard(|| {
        let s = &deref(s, "scenario")?.0;
        let d = FemOptions::default();
        let opts = FemOptions {
            theta: if theta > 0.0 { theta } else { d.theta },
            delta: if delta > 0.0 { delta } else { d.delta },
            ..d
        };
        let u = fem::run(s, nt, nx, &opts)?;
        write(out, Box::into_raw(Box::new(HabFemSolution(u))), "out")
    })
}

/// `u_h(t, x)`; zero outside the habitat.
///
/// # Safety
/// `u` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_fem_eval(u: *const HabFemSolution, t: f64, x: f64, out: *mut f64) -> HabStatus {
    guard(|| write(out, deref(u, "solution")?.0.eval(t, x), "out"))
}

/// `‖u_h(t, ·)‖_{L²}`.
///
/// # Safety
/// `u` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_fem_slice_l2(u: *const HabFemSolution, t: f64, out: *mut f64) -> HabStatus {
    guard(|| {
        let v = deref(u, "solution")?.0.slice_l2(t)?;
        write(out, v, "out")
    })
}

/// # Safety
/// `u` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hab_fem_free(u: *mut HabFemSolution) {
    free(u)
}

/// Finite-difference reference run; zero `ny` or nonpositive `tau` select the defaults.
///
/// # Safety
/// `s` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_oracle_run(
    s: *const HabScenario,
    ny: usize,
    tau: f64,
    out: *mut *mut HabOracleRun,
) -> HabStatus {
    guard(|| {
        let s = &deref(s, "scenario")?.0;
        let d = OracleOptions::default();
        let o = OracleOptions {
            ny: if ny > 0 { ny } else { d.ny },
            tau: if tau > 0.0 { tau } else { d.tau },
            ..d
        };
        let run = step_solver(s, &o)?;
        write(out, Box::into_raw(Box::new(HabOracleRun(run))), "out")
    })
}

/// `ln(‖u(T)‖/‖u(0)‖)` of a reference run.
///
/// # Safety
/// `run` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_oracle_log_growth(run: *const HabOracleRun, out: *mut f64) -> HabStatus {
    guard(|| write(out, deref(run, "run")?.0.log_growth(), "out"))
}

/// Copies up to `cap` trace points as `(t, ln‖u(t)‖)` pairs into `times` and
/// `log_l2`; writes the total number of points to `len`.
///
/// # Safety
/// `run` must be a valid handle; `times` and `log_l2` must hold `cap`
/// values (or be null when `cap` is zero); `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_oracle_trace(
    run: *const HabOracleRun,
    times: *mut f64,
    log_l2: *mut f64,
    cap: usize,
    len: *mut usize,
) -> HabStatus {
    guard(|| {
        let trace = &deref(run, "run")?.0.trace;
        if cap > 0 && (times.is_null() || log_l2.is_null()) {
            return Err(null("trace buffer"));
        }
        for (i, p) in trace.iter().take(cap).enumerate() {
            times.add(i).write(p.t);
            log_l2.add(i).write(p.log_l2_u);
        }
        write(len, trace.len(), "len")
    })
}

/// # Safety
/// `run` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hab_oracle_free(run: *mut HabOracleRun) {
    free(run)
}

/// Envelope for the scenario's initial datum; the eigenfunction uses
/// `ny + 2` nodes (zero selects the default).
///
/// # Safety
/// `s` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_envelope_build(s: *const HabScenario, ny: usize, out: *mut *mut HabEnvelope) -> HabStatus {
    guard(|| {
        let s = &deref(s, "scenario")?.0;
        let opts = if ny > 0 {
            EnvelopeOptions::matching_oracle(ny)
        } else {
            EnvelopeOptions::default()
        };
        let env = build_envelope(s, &opts)?;
        write(out, Box::into_raw(Box::new(HabEnvelope(env))), "out")
    })
}

/// Lower and upper bound of `v(t, y)` in the fixed frame.
///
/// # Safety
/// `env` must be a valid handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_envelope_eval(
    env: *const HabEnvelope,
    t: f64,
    y: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> HabStatus {
    guard(|| {
        let env = &deref(env, "envelope")?.0;
        write(lower, env.lower(t, y), "lower")?;
        write(upper, env.upper(t, y), "upper")
    })
}

/// Eigenvalue and sandwich constants `a`, `b` of an envelope.
///
/// # Safety
/// `env` must be a valid handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn hab_envelope_constants(
    env: *const HabEnvelope,
    lambda: *mut f64,
    a: *mut f64,
    b: *mut f64,
) -> HabStatus {
    guard(|| {
        let env = &deref(env, "envelope")?.0;
        write(lambda, env.lambda, "lambda")?;
        write(a, env.a, "a")?;
        write(b, env.b, "b")
    })
}

/// # Safety
/// `env` must be null or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hab_envelope_free(env: *mut HabEnvelope) {
    free(env)
}
