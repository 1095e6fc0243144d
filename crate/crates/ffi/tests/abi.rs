use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use remote_site_ffi::*;

fn last_error() -> String {
    let p = rs_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config(json: &str) -> *mut RsConfig {
    let json = CString::new(json).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { rs_config_from_json(json.as_ptr(), &mut cfg) }, RsStatus::Ok);
    cfg
}

#[test]
fn short_run_through_the_abi() {
    let cfg = config(r#"{"controller": {"kind": "rrm"}, "scenario": {"n_slots": 48}}"#);
    assert_eq!(unsafe { rs_config_check_feasibility(cfg) }, RsStatus::Ok);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { rs_simulation_run(cfg, &mut report) }, RsStatus::Ok);
    assert_eq!(unsafe { rs_report_slot_count(report) }, 48);
    let savings = unsafe { rs_report_savings_percent(report) };
    assert!(savings.is_finite() && savings > 0.0 && savings < 100.0, "{savings}");

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rs_report_summary_json(report, &mut json) }, RsStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { rs_string_free(json) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["controller"], "rrm");
    assert_eq!(v["n_slots"], 48);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("report.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { rs_report_write_csv(report, path.as_ptr()) }, RsStatus::Ok);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 49);

    unsafe {
        rs_report_free(report);
        rs_config_free(cfg);
    }
}

#[test]
fn default_config_round_trips() {
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { rs_config_default(&mut cfg) }, RsStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { rs_config_to_json(cfg, &mut json) }, RsStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { rs_string_free(json) };
    let again = config(&text);
    unsafe {
        rs_config_free(again);
        rs_config_free(cfg);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut cfg = ptr::null_mut();
    let bad = CString::new(r#"{"controller": {"upsilon": 3}}"#).unwrap();
    assert_eq!(unsafe { rs_config_from_json(bad.as_ptr(), &mut cfg) }, RsStatus::InvalidConfig);
    assert!(cfg.is_null());
    assert!(last_error().contains("controller.upsilon"));

    assert_eq!(unsafe { rs_config_from_json(ptr::null(), &mut cfg) }, RsStatus::NullPointer);
    assert_eq!(unsafe { rs_simulation_run(ptr::null(), ptr::null_mut()) }, RsStatus::NullPointer);

    let invalid = [0xffu8, 0xfe, 0];
    let status = unsafe { rs_config_from_json(invalid.as_ptr().cast(), &mut cfg) };
    assert_eq!(status, RsStatus::InvalidUtf8);

    let infeasible = config(r#"{"compute": {"input_buffer_bits": 900000000000}}"#);
    assert_eq!(unsafe { rs_config_check_feasibility(infeasible) }, RsStatus::Infeasible);
    assert!(last_error().contains("link budget"));
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { rs_simulation_run(infeasible, &mut report) }, RsStatus::Infeasible);
    assert!(report.is_null());
    unsafe { rs_config_free(infeasible) };

    assert_eq!(unsafe { rs_config_default(&mut cfg) }, RsStatus::Ok);
    assert!(rs_last_error_message().is_null());
    unsafe { rs_config_free(cfg) };
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        rs_config_free(ptr::null_mut());
        rs_report_free(ptr::null_mut());
        rs_string_free(ptr::null_mut());
        assert_eq!(rs_report_slot_count(ptr::null()), 0);
        assert!(rs_report_savings_percent(ptr::null()).is_nan());
    }
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/remote_site.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "rs_config_default",
        "rs_config_from_json",
        "rs_config_free",
        "rs_config_check_feasibility",
        "rs_simulation_run",
        "rs_report_summary_json",
        "rs_report_slot_count",
        "rs_report_savings_percent",
        "rs_string_free",
        "rs_last_error_message",
        "RS_STATUS_INVARIANT_VIOLATION = 5",
        "typedef struct RsConfig RsConfig;",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // Compile check when a C compiler is around.
    let Ok(status) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-xc"]).arg(&header).status() else {
        return;
    };
    assert!(status.success(), "header does not compile");
}
