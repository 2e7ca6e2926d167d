//! Drives the C entry points the way a foreign caller would: raw pointers
//! in, status codes out, explicit frees.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use peermech_ffi::*;

const WEIGHTS: &str = include_str!("../../core/tests/instances/a2_weights.json");
const JURY2: &str = include_str!("../../core/tests/instances/jury2.json");

fn cstring(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    pm_string_free(p);
    s
}

unsafe fn parse(json: &str) -> *mut PmInstance {
    let text = cstring(json);
    let mut inst: *mut PmInstance = ptr::null_mut();
    assert_eq!(pm_instance_parse(text.as_ptr(), &mut inst), PmStatus::Ok);
    assert!(!inst.is_null());
    inst
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(pm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn lp_solve_round_trips_through_the_c_surface() {
    unsafe {
        let inst = parse(WEIGHTS);
        assert_eq!(pm_instance_agents(inst), 3);
        assert_eq!(pm_instance_vertex_count(inst), 16);

        let mut report: *mut PmReport = ptr::null_mut();
        assert_eq!(pm_solve_lp(inst, false, &mut report), PmStatus::Ok);

        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(pm_report_objective(report, &mut s), PmStatus::Ok);
        assert_eq!(take_string(s), "7/2");

        let mut j: *mut c_char = ptr::null_mut();
        assert_eq!(pm_report_json(report, &mut j), PmStatus::Ok);
        let value: serde_json::Value = serde_json::from_str(&take_string(j)).unwrap();
        assert_eq!(value["status"], "optimal");
        assert_eq!(value["objective"], "7/2");

        // The optimal mechanism is a vertex of the polytope: feed it back in.
        let mech = cstring(&value["mechanism"].to_string());
        let mut cert: *mut c_char = ptr::null_mut();
        assert_eq!(
            pm_extreme_certificate(inst, mech.as_ptr(), &mut cert),
            PmStatus::Ok
        );
        let cert: serde_json::Value = serde_json::from_str(&take_string(cert)).unwrap();
        assert_eq!(cert["verdict"], "extreme");

        pm_report_free(report);
        pm_instance_free(inst);
    }
}

#[test]
fn deterministic_and_jury_solves_work_on_an_environment() {
    unsafe {
        let inst = parse(JURY2);

        let mut det: *mut PmReport = ptr::null_mut();
        assert_eq!(pm_solve_deterministic(inst, false, &mut det), PmStatus::Ok);
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(pm_report_objective(det, &mut s), PmStatus::Ok);
        assert_eq!(take_string(s), "1/2");
        pm_report_free(det);

        let mut jury: *mut PmReport = ptr::null_mut();
        assert_eq!(pm_solve_jury(inst, false, &mut jury), PmStatus::Ok);
        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(pm_report_objective(jury, &mut s), PmStatus::Ok);
        assert_eq!(take_string(s), "1/2");
        pm_report_free(jury);

        pm_instance_free(inst);
    }
}

#[test]
fn jury_solve_rejects_a_bare_weight_vector() {
    unsafe {
        let inst = parse(WEIGHTS);
        let mut report: *mut PmReport = ptr::null_mut();
        assert_eq!(pm_solve_jury(inst, false, &mut report), PmStatus::Invalid);
        assert!(report.is_null());
        let msg = CStr::from_ptr(pm_last_error()).to_str().unwrap();
        assert!(msg.contains("environment"), "{msg}");
        pm_instance_free(inst);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let garbage = cstring("{ not json");
        let mut inst: *mut PmInstance = ptr::null_mut();
        assert_eq!(
            pm_instance_parse(garbage.as_ptr(), &mut inst),
            PmStatus::Parse
        );
        assert!(inst.is_null());
        assert!(!CStr::from_ptr(pm_last_error()).to_bytes().is_empty());

        assert_eq!(
            pm_instance_parse(ptr::null(), &mut inst),
            PmStatus::NullInput
        );
        let text = cstring("{}");
        assert_eq!(
            pm_instance_parse(text.as_ptr(), ptr::null_mut()),
            PmStatus::NullInput
        );

        let bad_utf8 = [0xffu8, 0xfe, 0x00];
        assert_eq!(
            pm_instance_parse(bad_utf8.as_ptr() as *const c_char, &mut inst),
            PmStatus::InvalidUtf8
        );

        assert_eq!(pm_instance_agents(ptr::null()), 0);
        assert_eq!(pm_instance_vertex_count(ptr::null()), 0);

        let mut s: *mut c_char = ptr::null_mut();
        assert_eq!(
            pm_report_objective(ptr::null(), &mut s),
            PmStatus::NullInput
        );

        // Frees of null are harmless no-ops.
        pm_instance_free(ptr::null_mut());
        pm_report_free(ptr::null_mut());
        pm_string_free(ptr::null_mut());
    }
}

#[test]
fn generated_header_declares_the_full_surface() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/peermech.h"))
            .expect("build script writes the header");
    for symbol in [
        "typedef struct PmInstance PmInstance;",
        "typedef struct PmReport PmReport;",
        "PmStatus_Guard = 3,",
        "pm_instance_parse",
        "pm_solve_lp",
        "pm_solve_deterministic",
        "pm_solve_jury",
        "pm_report_objective",
        "pm_report_json",
        "pm_extreme_certificate",
        "pm_string_free",
        "pm_last_error",
        "pm_version",
    ] {
        assert!(header.contains(symbol), "header is missing `{symbol}`");
    }
}
