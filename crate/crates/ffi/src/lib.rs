//! C interface to the allocation solver. Instances and reports live behind
//! opaque handles; every string crossing the boundary is UTF-8 JSON or a
//! rational rendered as `p/q`. Entry points never unwind: panics are caught
//! and surfaced as a status code, with the message kept in thread-local
//! storage for `pm_last_error`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use peermech::env::{load_instance, Instance};
use peermech::extremal::is_extreme;
use peermech::fgraph::{FeasibilityGraph, GraphOracle};
use peermech::mech::{load_mechanism, Mode};
use peermech::solve::{solve_deterministic, solve_jury, solve_lp, SolveOptions, SolveReport};
use peermech::Error;

/// Result of every fallible call. Anything other than `Ok` leaves a
/// human-readable message readable through `pm_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmStatus {
    Ok = 0,
    /// Malformed input text (JSON or rational syntax).
    Parse = 1,
    /// Structurally well-formed input that violates a domain rule.
    Invalid = 2,
    /// A size guard refused the computation.
    Guard = 3,
    Io = 4,
    /// A required pointer argument was null.
    NullInput = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// An internal invariant failed; the library state is still sound.
    Panicked = 7,
}

/// A parsed instance plus its feasibility graph.
pub struct PmInstance {
    inst: Instance,
    graph: FeasibilityGraph,
}

/// A finished solve. Self-contained: rendering does not need the instance.
pub struct PmReport {
    report: SolveReport,
    graph: FeasibilityGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes removed"));
}

fn fail(e: Error) -> PmStatus {
    let status = match &e {
        Error::Parse(_) => PmStatus::Parse,
        Error::Invalid(_) => PmStatus::Invalid,
        Error::GuardExceeded(_) => PmStatus::Guard,
        Error::Io(_) => PmStatus::Io,
    };
    set_error(&e.to_string());
    status
}

fn guarded(f: impl FnOnce() -> PmStatus) -> PmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            PmStatus::Panicked
        }
    }
}

/// # Safety
/// `p` must be null or a pointer previously returned by this library.
unsafe fn input_str<'a>(p: *const c_char) -> Result<&'a str, PmStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(PmStatus::NullInput);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        PmStatus::InvalidUtf8
    })
}

fn give_string(out: *mut *mut c_char, s: String) -> PmStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            PmStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL byte");
            PmStatus::Invalid
        }
    }
}

fn null_out(name: &str) -> PmStatus {
    set_error(&format!("null output pointer: {name}"));
    PmStatus::NullInput
}

/// Library version as a static string. Never freed by the caller.
#[no_mangle]
pub extern "C" fn pm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread. Valid until the next
/// failing call on the same thread. Never freed by the caller.
#[no_mangle]
pub extern "C" fn pm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses an instance (an environment or a bare weight vector) from JSON and
/// builds its feasibility graph. On `Ok`, `*out` owns the handle; release it
/// with `pm_instance_free`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pm_instance_parse(
    json: *const c_char,
    out: *mut *mut PmInstance,
) -> PmStatus {
    guarded(|| {
        if out.is_null() {
            return null_out("out");
        }
        let text = match input_str(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let inst = match load_instance(text) {
            Ok(i) => i,
            Err(e) => return fail(e),
        };
        let graph = match FeasibilityGraph::build(inst.type_spaces().to_vec()) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        *out = Box::into_raw(Box::new(PmInstance { inst, graph }));
        PmStatus::Ok
    })
}

/// # Safety
/// `p` must be null or a handle from `pm_instance_parse`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pm_instance_free(p: *mut PmInstance) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of agents, or 0 if `p` is null.
///
/// # Safety
/// `p` must be null or a live handle from `pm_instance_parse`.
#[no_mangle]
pub unsafe extern "C" fn pm_instance_agents(p: *const PmInstance) -> u32 {
    p.as_ref().map_or(0, |h| h.inst.type_spaces().len() as u32)
}

/// Vertex count of the feasibility graph, or 0 if `p` is null.
///
/// # Safety
/// `p` must be null or a live handle from `pm_instance_parse`.
#[no_mangle]
pub unsafe extern "C" fn pm_instance_vertex_count(p: *const PmInstance) -> u32 {
    p.as_ref().map_or(0, |h| h.graph.vertex_count() as u32)
}

fn mode_of(must_allocate: bool) -> Mode {
    if must_allocate {
        Mode::MustAllocate
    } else {
        Mode::MayWithhold
    }
}

unsafe fn run_solve(
    p: *const PmInstance,
    out: *mut *mut PmReport,
    solve: impl FnOnce(&PmInstance) -> peermech::Result<SolveReport>,
) -> PmStatus {
    if out.is_null() {
        return null_out("out");
    }
    let handle = match p.as_ref() {
        Some(h) => h,
        None => return null_out("instance"),
    };
    match solve(handle) {
        Ok(report) => {
            *out = Box::into_raw(Box::new(PmReport {
                report,
                graph: handle.graph.clone(),
            }));
            PmStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Exact optimal truthful mechanism. On `Ok`, `*out` owns the report;
/// release it with `pm_report_free`.
///
/// # Safety
/// `p` must be a live handle from `pm_instance_parse`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pm_solve_lp(
    p: *const PmInstance,
    must_allocate: bool,
    out: *mut *mut PmReport,
) -> PmStatus {
    guarded(|| {
        run_solve(p, out, |h| {
            solve_lp(&h.inst, mode_of(must_allocate), &SolveOptions::default())
        })
    })
}

/// Exact optimal deterministic mechanism (best stable set).
///
/// # Safety
/// `p` must be a live handle from `pm_instance_parse`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pm_solve_deterministic(
    p: *const PmInstance,
    must_allocate: bool,
    out: *mut *mut PmReport,
) -> PmStatus {
    guarded(|| {
        run_solve(p, out, |h| {
            solve_deterministic(&h.inst, mode_of(must_allocate), &SolveOptions::default())
        })
    })
}

/// Exact optimal jury mechanism. Requires a full environment; a bare weight
/// vector yields `Invalid`.
///
/// # Safety
/// `p` must be a live handle from `pm_instance_parse`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pm_solve_jury(
    p: *const PmInstance,
    must_allocate: bool,
    out: *mut *mut PmReport,
) -> PmStatus {
    guarded(|| {
        run_solve(p, out, |h| {
            let env = h.inst.env().ok_or_else(|| {
                Error::invalid("a jury solve needs an environment, not a bare weight vector")
            })?;
            solve_jury(env, mode_of(must_allocate), &SolveOptions::default())
        })
    })
}

/// # Safety
/// `r` must be null or a handle from a solve call, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pm_report_free(r: *mut PmReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Objective value as a `p/q` string. Free with `pm_string_free`.
///
/// # Safety
/// `r` must be a live handle from a solve call; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pm_report_objective(
    r: *const PmReport,
    out: *mut *mut c_char,
) -> PmStatus {
    guarded(|| {
        if out.is_null() {
            return null_out("out");
        }
        match r.as_ref() {
            Some(h) => give_string(out, peermech::rat::fmt_rat(&h.report.objective)),
            None => null_out("report"),
        }
    })
}

/// Full report (status, objective, stats, mechanism) as JSON. Free with
/// `pm_string_free`.
///
/// # Safety
/// `r` must be a live handle from a solve call; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pm_report_json(r: *const PmReport, out: *mut *mut c_char) -> PmStatus {
    guarded(|| {
        if out.is_null() {
            return null_out("out");
        }
        match r.as_ref() {
            Some(h) => give_string(out, h.report.to_json(&h.graph)),
            None => null_out("report"),
        }
    })
}

/// Decides whether a mechanism (as JSON) is an extreme point of the truthful
/// polytope of `p`, returning the certificate as JSON. Free the string with
/// `pm_string_free`.
///
/// # Safety
/// `p` must be a live handle from `pm_instance_parse`; `mech_json` must be a
/// NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pm_extreme_certificate(
    p: *const PmInstance,
    mech_json: *const c_char,
    out: *mut *mut c_char,
) -> PmStatus {
    guarded(|| {
        if out.is_null() {
            return null_out("out");
        }
        let handle = match p.as_ref() {
            Some(h) => h,
            None => return null_out("instance"),
        };
        let text = match input_str(mech_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let mech = match load_mechanism(&handle.graph, text) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        match is_extreme(&handle.graph, &mech) {
            Ok(cert) => give_string(out, cert.to_json(&handle.graph)),
            Err(e) => fail(e),
        }
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string pointer returned by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn pm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
