//! C ABI for the scheduling library: opaque handles, integer status codes,
//! and a generated header (`include/m2m_sched.h`) so other languages can
//! drive experiments without linking Rust directly.
//!
//! Ownership rules: every `*_new`/`*_load`/`*_run` output is owned by the
//! caller and must be released with the matching `*_free`; strings returned
//! as `*const c_char` are static and must not be freed.

use m2m_sched::config::SimConfig;
use m2m_sched::sim::{run_experiment, ExperimentSummary};
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MschedStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    DomainError = 4,
    RuntimeError = 5,
    Panic = 6,
}

/// Opaque experiment configuration.
pub struct MschedConfig {
    inner: SimConfig,
}

/// Opaque result of a finished experiment.
pub struct MschedReport {
    inner: ExperimentSummary,
}

/// Aggregate metrics of one experiment, averaged over replications.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MschedSummary {
    /// Shortest individual lifetime, seconds.
    pub sil_s: f64,
    /// Longest individual lifetime, seconds.
    pub lil_s: f64,
    /// Average individual lifetime, seconds.
    pub ail_s: f64,
    /// Jain fairness index of the drain times.
    pub jain: f64,
    /// Delivered bits per consumed joule.
    pub energy_efficiency_bits_per_j: f64,
    /// Delivered bits per second-Hz of reserved resources.
    pub spectral_efficiency_bits_s_hz: f64,
    /// Nodes drained per replication (mean).
    pub drained_nodes: f64,
    /// Constraint violations across all replications (must be 0).
    pub violations: u64,
    pub replications: u64,
}

/// Version of the underlying library, as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn msched_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Human-readable name of a status code (static string).
#[no_mangle]
pub extern "C" fn msched_status_name(status: MschedStatus) -> *const c_char {
    let s: &'static str = match status {
        MschedStatus::Ok => "ok\0",
        MschedStatus::NullArgument => "null argument\0",
        MschedStatus::InvalidUtf8 => "invalid utf-8\0",
        MschedStatus::InvalidConfig => "invalid config\0",
        MschedStatus::DomainError => "domain error\0",
        MschedStatus::RuntimeError => "runtime error\0",
        MschedStatus::Panic => "panic\0",
    };
    s.as_ptr() as *const c_char
}

/// Principal-branch LambertW. Writes the result through `out`; fails with
/// `DomainError` below the branch point.
///
/// # Safety
/// `out` must point to writable memory for one f64.
#[no_mangle]
pub unsafe extern "C" fn msched_lambert_w(x: f64, out: *mut f64) -> MschedStatus {
    if out.is_null() {
        return MschedStatus::NullArgument;
    }
    match m2m_sched::math::lambert_w(x) {
        Ok(w) => {
            *out = w;
            MschedStatus::Ok
        }
        Err(_) => MschedStatus::DomainError,
    }
}

/// Fresh configuration with the library defaults. Never returns NULL.
#[no_mangle]
pub extern "C" fn msched_config_default() -> *mut MschedConfig {
    Box::into_raw(Box::new(MschedConfig {
        inner: SimConfig::default(),
    }))
}

/// Load a configuration from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msched_config_load(
    path: *const c_char,
    out: *mut *mut MschedConfig,
) -> MschedStatus {
    if path.is_null() || out.is_null() {
        return MschedStatus::NullArgument;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return MschedStatus::InvalidUtf8;
    };
    match SimConfig::load(Path::new(path)) {
        Ok(cfg) => {
            *out = Box::into_raw(Box::new(MschedConfig { inner: cfg }));
            MschedStatus::Ok
        }
        Err(_) => MschedStatus::InvalidConfig,
    }
}

/// Apply a `section.key=value` override (same syntax as the CLI `--set`).
///
/// # Safety
/// `cfg` must be a live handle from this library; `spec` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn msched_config_set(
    cfg: *mut MschedConfig,
    spec: *const c_char,
) -> MschedStatus {
    if cfg.is_null() || spec.is_null() {
        return MschedStatus::NullArgument;
    }
    let Ok(spec) = CStr::from_ptr(spec).to_str() else {
        return MschedStatus::InvalidUtf8;
    };
    match (*cfg).inner.apply_override(spec) {
        Ok(()) => MschedStatus::Ok,
        Err(_) => MschedStatus::InvalidConfig,
    }
}

/// Release a configuration handle. NULL is a no-op.
///
/// # Safety
/// `cfg` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn msched_config_free(cfg: *mut MschedConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run the configured experiment (all replications, in parallel) and hand
/// back a report handle.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msched_run(
    cfg: *const MschedConfig,
    out: *mut *mut MschedReport,
) -> MschedStatus {
    if cfg.is_null() || out.is_null() {
        return MschedStatus::NullArgument;
    }
    let config = &(*cfg).inner;
    let result = catch_unwind(AssertUnwindSafe(|| run_experiment(config)));
    match result {
        Ok(Ok(summary)) => {
            *out = Box::into_raw(Box::new(MschedReport { inner: summary }));
            MschedStatus::Ok
        }
        Ok(Err(m2m_sched::sim::SimError::Config(_))) => MschedStatus::InvalidConfig,
        Ok(Err(_)) => MschedStatus::RuntimeError,
        Err(_) => MschedStatus::Panic,
    }
}

/// Aggregate metrics of a finished experiment.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn msched_report_summary(
    report: *const MschedReport,
    out: *mut MschedSummary,
) -> MschedStatus {
    if report.is_null() || out.is_null() {
        return MschedStatus::NullArgument;
    }
    let s = &(*report).inner;
    *out = MschedSummary {
        sil_s: s.stat(|r| r.sil_s()).mean,
        lil_s: s.stat(|r| r.lil_s()).mean,
        ail_s: s.stat(|r| r.ail_s()).mean,
        jain: s.stat(|r| r.jain()).mean,
        energy_efficiency_bits_per_j: s.stat(|r| r.energy_efficiency()).mean,
        spectral_efficiency_bits_s_hz: s.stat(|r| r.spectral_efficiency()).mean,
        drained_nodes: s.stat(|r| r.drained_count() as f64).mean,
        violations: s.total_violations(),
        replications: s.reports.len() as u64,
    };
    MschedStatus::Ok
}

/// Release a report handle. NULL is a no-op.
///
/// # Safety
/// `report` must have come from this library and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn msched_report_free(report: *mut MschedReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
