//! C ABI over the `tpb` experiment harness.
//!
//! Conventions:
//! - `TpbConfig` and `TpbReport` are opaque handles created and released by
//!   this library (`tpb_config_free` / `tpb_report_free`).
//! - Functions return [`TpbStatus`]; on any non-`Ok` status a human-readable
//!   message is available from `tpb_last_error` until the next call on the
//!   same thread.
//! - Strings returned as `char*` are owned by the caller and must be
//!   released with `tpb_string_free`.
//!
//! The header `include/tpb.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{CStr, CString, c_char};
use std::path::Path;

use tpb::harness::{self, ExperimentConfig, ExperimentReport};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    RunError = 4,
    IoError = 5,
}

/// Opaque parsed experiment configuration.
pub struct TpbConfig {
    inner: ExperimentConfig,
}

/// Opaque experiment report (curves, bounds, provenance).
pub struct TpbReport {
    inner: ExperimentReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs stripped");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn tpb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string; do not free.
#[unsafe(no_mangle)]
pub extern "C" fn tpb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer previously returned by a `tpb_*` function
/// documented as caller-owned, and must not be used afterwards.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parse config text (the same `key = value` format the CLI reads) into an
/// opaque handle written to `*out`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_config_parse(
    text: *const c_char,
    out: *mut *mut TpbConfig,
) -> TpbStatus {
    clear_error();
    if text.is_null() || out.is_null() {
        set_error("null pointer argument".into());
        return TpbStatus::NullPointer;
    }
    let Ok(text) = unsafe { CStr::from_ptr(text) }.to_str() else {
        set_error("config text is not valid UTF-8".into());
        return TpbStatus::InvalidUtf8;
    };
    match harness::parse_config(text) {
        Ok(config) => {
            unsafe { *out = Box::into_raw(Box::new(TpbConfig { inner: config })) };
            TpbStatus::Ok
        }
        Err(errors) => {
            set_error(errors.join("; "));
            TpbStatus::ConfigError
        }
    }
}

/// Release a config handle.
///
/// # Safety
/// `config` must be null or a pointer from `tpb_config_parse`, freed once.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_config_free(config: *mut TpbConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Override the trial count (same effect as the CLI `--trials` flag).
///
/// # Safety
/// `config` must be a valid handle from `tpb_config_parse`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_config_set_trials(config: *mut TpbConfig, trials: u64) -> TpbStatus {
    clear_error();
    let Some(config) = (unsafe { config.as_mut() }) else {
        set_error("null config".into());
        return TpbStatus::NullPointer;
    };
    if trials == 0 {
        set_error("trials must be >= 1".into());
        return TpbStatus::ConfigError;
    }
    config.inner.trials = trials;
    TpbStatus::Ok
}

/// Override the base seed (same effect as the CLI `--seed` flag).
///
/// # Safety
/// `config` must be a valid handle from `tpb_config_parse`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_config_set_seed(config: *mut TpbConfig, seed: u64) -> TpbStatus {
    clear_error();
    let Some(config) = (unsafe { config.as_mut() }) else {
        set_error("null config".into());
        return TpbStatus::NullPointer;
    };
    config.inner.base_seed = seed;
    TpbStatus::Ok
}

/// Hash of the canonical config text; caller frees with `tpb_string_free`.
/// Returns null on a null handle.
///
/// # Safety
/// `config` must be null or a valid handle from `tpb_config_parse`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_config_hash(config: *const TpbConfig) -> *mut c_char {
    match unsafe { config.as_ref() } {
        Some(c) => CString::new(c.inner.hash()).expect("hex hash").into_raw(),
        None => std::ptr::null_mut(),
    }
}

/// Run the experiment over `jobs` worker threads (0 means 1); writes an
/// opaque report handle to `*out`. Results do not depend on `jobs`.
///
/// # Safety
/// `config` must be a valid handle and `out` a valid pointer.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_run(
    config: *const TpbConfig,
    jobs: u32,
    out: *mut *mut TpbReport,
) -> TpbStatus {
    clear_error();
    let (Some(config), false) = (unsafe { config.as_ref() }, out.is_null()) else {
        set_error("null pointer argument".into());
        return TpbStatus::NullPointer;
    };
    match harness::run_experiment(&config.inner, jobs.max(1) as usize) {
        Ok(report) => {
            unsafe { *out = Box::into_raw(Box::new(TpbReport { inner: report })) };
            TpbStatus::Ok
        }
        Err(harness::HarnessError::Config(errors)) => {
            set_error(errors.join("; "));
            TpbStatus::ConfigError
        }
        Err(e) => {
            set_error(e.to_string());
            TpbStatus::RunError
        }
    }
}

/// Release a report handle.
///
/// # Safety
/// `report` must be null or a pointer from `tpb_run`, freed once.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_free(report: *mut TpbReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// The full report as CSV text; caller frees with `tpb_string_free`.
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_csv(report: *const TpbReport) -> *mut c_char {
    match unsafe { report.as_ref() } {
        Some(r) => CString::new(harness::emit_csv_string(&r.inner))
            .expect("CSV has no NULs")
            .into_raw(),
        None => std::ptr::null_mut(),
    }
}

/// Write the report CSV to `path`.
///
/// # Safety
/// `report` must be a valid handle and `path` a NUL-terminated string.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_write_csv(
    report: *const TpbReport,
    path: *const c_char,
) -> TpbStatus {
    clear_error();
    let (Some(report), false) = (unsafe { report.as_ref() }, path.is_null()) else {
        set_error("null pointer argument".into());
        return TpbStatus::NullPointer;
    };
    let Ok(path) = unsafe { CStr::from_ptr(path) }.to_str() else {
        set_error("path is not valid UTF-8".into());
        return TpbStatus::InvalidUtf8;
    };
    match harness::emit_csv(&report.inner, Path::new(path)) {
        Ok(()) => TpbStatus::Ok,
        Err(e) => {
            set_error(e.to_string());
            TpbStatus::IoError
        }
    }
}

/// 1 when a two-phase mean exceeded its theoretical bound, 0 otherwise,
/// -1 on a null handle.
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_bound_violation(report: *const TpbReport) -> i32 {
    match unsafe { report.as_ref() } {
        Some(r) => i32::from(r.inner.bound_violation),
        None => -1,
    }
}

/// Number of policy curves in the report (0 on null).
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_policy_count(report: *const TpbReport) -> usize {
    unsafe { report.as_ref() }.map_or(0, |r| r.inner.curves.len())
}

/// Number of checkpoints (0 on null).
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_checkpoint_count(report: *const TpbReport) -> usize {
    unsafe { report.as_ref() }.map_or(0, |r| r.inner.checkpoints.len())
}

/// Checkpoint timestep by index (0 when out of range).
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_checkpoint(report: *const TpbReport, index: usize) -> u64 {
    unsafe { report.as_ref() }
        .and_then(|r| r.inner.checkpoints.get(index).copied())
        .unwrap_or(0)
}

/// Policy name by curve index; caller frees with `tpb_string_free`.
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_policy_name(
    report: *const TpbReport,
    policy: usize,
) -> *mut c_char {
    unsafe { report.as_ref() }
        .and_then(|r| r.inner.curves.get(policy))
        .map_or(std::ptr::null_mut(), |c| {
            CString::new(c.policy.clone()).expect("policy names are plain").into_raw()
        })
}

fn curve_value(
    report: *const TpbReport,
    policy: usize,
    checkpoint: usize,
    pick: impl Fn(&harness::PolicyCurve, usize) -> Option<f64>,
) -> f64 {
    unsafe { report.as_ref() }
        .and_then(|r| r.inner.curves.get(policy))
        .and_then(|c| pick(c, checkpoint))
        .unwrap_or(f64::NAN)
}

/// Mean cumulative pseudo-regret at (policy, checkpoint); NaN out of range.
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_mean(
    report: *const TpbReport,
    policy: usize,
    checkpoint: usize,
) -> f64 {
    curve_value(report, policy, checkpoint, |c, k| c.mean_regret.get(k).copied())
}

/// Standard error at (policy, checkpoint); NaN out of range.
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_stderr(
    report: *const TpbReport,
    policy: usize,
    checkpoint: usize,
) -> f64 {
    curve_value(report, policy, checkpoint, |c, k| c.stderr.get(k).copied())
}

/// Theoretical bound at (policy, checkpoint); NaN when no bound applies.
///
/// # Safety
/// `report` must be null or a valid handle from `tpb_run`.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn tpb_report_bound(
    report: *const TpbReport,
    policy: usize,
    checkpoint: usize,
) -> f64 {
    curve_value(report, policy, checkpoint, |c, k| {
        c.bound.as_ref().and_then(|b| b.get(k).copied())
    })
}
