//! C ABI over the simulator.
//!
//! Configurations and reports are opaque handles created and released by the
//! functions below. Every fallible call returns an [`RsStatus`]; on failure
//! [`rs_last_error_message`] describes the error on the calling thread.
//! Strings returned through out-parameters are owned by the caller and must
//! be released with [`rs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use remote_site::config::RunConfig;
use remote_site::sim::{baseline_energy, run, write_report_csv, SimReport};
use remote_site::site::check_feasibility;
use remote_site::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Infeasible = 4,
    InvariantViolation = 5,
    Io = 6,
    Panic = 7,
}

/// Run configuration.
pub struct RsConfig {
    inner: RunConfig,
}

/// Completed simulation with its per-slot records.
pub struct RsReport {
    inner: SimReport,
    baseline_j: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> RsStatus {
    match err {
        Error::Infeasible(_) => RsStatus::Infeasible,
        Error::Invariant { .. } | Error::EnergyViolation { .. } | Error::BufferOverflow { .. } => {
            RsStatus::InvariantViolation
        }
        Error::Io(_) | Error::Csv(_) => RsStatus::Io,
        _ => RsStatus::InvalidConfig,
    }
}

/// Runs `f`, recording any error or panic for [`rs_last_error_message`].
fn guard(f: impl FnOnce() -> Result<(), (RsStatus, String)>) -> RsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            RsStatus::Panic
        }
    }
}

fn lib_err(err: Error) -> (RsStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (RsStatus, String) {
    (RsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (RsStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn into_c_string(s: String) -> Result<*mut c_char, (RsStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (RsStatus::InvalidUtf8, "string contains an interior NUL".to_string()))
}

/// Default configuration.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rs_config_default(out: *mut *mut RsConfig) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(RsConfig { inner: RunConfig::default() }));
        Ok(())
    })
}

/// Parses a JSON configuration; missing fields take their defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_config_from_json(json: *const c_char, out: *mut *mut RsConfig) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let inner = RunConfig::from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RsConfig { inner }));
        Ok(())
    })
}

/// Effective configuration as JSON.
///
/// # Safety
/// `config` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_config_to_json(config: *const RsConfig, out: *mut *mut c_char) -> RsStatus {
    guard(|| {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(config.inner.to_json().map_err(lib_err)?)?;
        Ok(())
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `config` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_config_free(config: *mut RsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// `RS_STATUS_OK` when the site can serve its input buffer within a slot,
/// `RS_STATUS_INFEASIBLE` otherwise.
///
/// # Safety
/// `config` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn rs_config_check_feasibility(config: *const RsConfig) -> RsStatus {
    guard(|| {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        let cp = &config.inner.compute;
        let f = check_feasibility(cp, cp.input_buffer_bits);
        if f.feasible {
            Ok(())
        } else {
            Err(lib_err(Error::Infeasible(f.detail)))
        }
    })
}

/// Runs the configured scenario to completion.
///
/// # Safety
/// `config` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_simulation_run(config: *const RsConfig, out: *mut *mut RsReport) -> RsStatus {
    guard(|| {
        let config = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let scenario = config.inner.scenario().map_err(lib_err)?;
        let baseline_j = baseline_energy(&scenario).map_err(lib_err)?;
        let inner = run(&scenario).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RsReport { inner, baseline_j }));
        Ok(())
    })
}

/// Aggregate results as JSON.
///
/// # Safety
/// `report` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rs_report_summary_json(report: *const RsReport, out: *mut *mut c_char) -> RsStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = serde_json::to_string_pretty(&report.inner).map_err(|e| lib_err(e.into()))?;
        *out = into_c_string(json)?;
        Ok(())
    })
}

/// Writes the per-slot CSV report to `path`.
///
/// # Safety
/// `report` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rs_report_write_csv(report: *const RsReport, path: *const c_char) -> RsStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        let path = str_arg(path, "path")?;
        write_report_csv(Path::new(path), &report.inner.records, report.baseline_j).map_err(lib_err)
    })
}

/// Number of simulated slots; 0 for a null handle.
///
/// # Safety
/// `report` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rs_report_slot_count(report: *const RsReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.records.len())
}

/// Mean savings against the maximum-capacity site, in percent; NaN for a
/// null handle.
///
/// # Safety
/// `report` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn rs_report_savings_percent(report: *const RsReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.savings_percent)
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_report_free(report: *mut RsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
