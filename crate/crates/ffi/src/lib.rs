//! C ABI for `condprep`.
//!
//! Every fallible call returns a [`CondprepStatus`] and writes results through
//! out-pointers. Objects are opaque handles released with the matching
//! `*_free`. The message for the most recent failure on the calling thread is
//! available from [`condprep_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use condprep::cli::Report;
use condprep::detectors::{cascade_probability, CascadeConfig};
use condprep::error::Error;
use condprep::experiments::{self, AyDetection, InnsbruckConfig, VacuumWeightModel};
use condprep::{lithography, metrology};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondprepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfDomain = 3,
    Dimension = 4,
    ZeroProbability = 5,
    Unsupported = 6,
    Io = 7,
    Parse = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

impl From<&Error> for CondprepStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::Cutoff { .. } => CondprepStatus::OutOfDomain,
            Error::Dimension(_) | Error::RegisterMismatch => CondprepStatus::Dimension,
            Error::ZeroProbability | Error::ZeroNorm => CondprepStatus::ZeroProbability,
            Error::Unsupported(_) => CondprepStatus::Unsupported,
            Error::Io(_) => CondprepStatus::Io,
            Error::Parse(_) => CondprepStatus::Parse,
            _ => CondprepStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F>(f: F) -> CondprepStatus
where
    F: FnOnce() -> Result<(), (CondprepStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CondprepStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CondprepStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (CondprepStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (CondprepStatus, String) {
    (CondprepStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (CondprepStatus, String)> {
    // SAFETY: caller guarantees p is null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CondprepStatus, String)> {
    // SAFETY: caller guarantees p is null or a live handle.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn condprep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn condprep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ------------------------------------------------------------- cascades

/// Opaque cascade of N single-photon-sensitive detectors.
pub struct CondprepCascade(CascadeConfig);

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn condprep_cascade_new(n: usize, eta2: f64, out: *mut *mut CondprepCascade) -> CondprepStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let cfg = CascadeConfig::new(n, eta2).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CondprepCascade(cfg)));
        Ok(())
    })
}

/// Probability that exactly `k` detectors fire for `m` incoming photons.
///
/// # Safety
/// `h` must be null or a live cascade handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn condprep_cascade_probability(
    h: *const CondprepCascade,
    k: u32,
    m: u32,
    out: *mut f64,
) -> CondprepStatus {
    guard(|| {
        let h = unsafe { in_ref(h, "cascade") }?;
        let out = unsafe { out_ref(out, "out") }?;
        *out = cascade_probability(&h.0, k, m).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `condprep_cascade_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn condprep_cascade_free(h: *mut CondprepCascade) {
    if !h.is_null() {
        // SAFETY: h came from Box::into_raw.
        drop(unsafe { Box::from_raw(h) });
    }
}

// ---------------------------------------------------------- teleportation

/// Opaque teleportation-experiment configuration.
pub struct CondprepTeleport(InnsbruckConfig);

/// Detection of the sender's y mode.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondprepAyDetection {
    NoClick = 0,
    Undetected = 1,
}

/// Vacuum weight used in the closed-form fidelity.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CondprepVacuumModel {
    Derived = 0,
    Published = 1,
}

/// Both sources at pair probability `p`, all detectors at `eta2`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn condprep_teleport_new(
    p: f64,
    theta: f64,
    n: usize,
    eta2: f64,
    out: *mut *mut CondprepTeleport,
) -> CondprepStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        let cfg = InnsbruckConfig::new(p, theta, n, eta2).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CondprepTeleport(cfg)));
        Ok(())
    })
}

/// Selects detection of the y mode and the vacuum model, given as
/// `CondprepAyDetection` and `CondprepVacuumModel` values. Integers are taken
/// so that out-of-range codes are rejected instead of being undefined.
///
/// # Safety
/// `h` must be null or a live teleport handle.
#[no_mangle]
pub unsafe extern "C" fn condprep_teleport_set_detection(h: *mut CondprepTeleport, ay: i32, model: i32) -> CondprepStatus {
    guard(|| {
        let h = unsafe { out_ref(h, "teleport") }?;
        let ay = match ay {
            x if x == CondprepAyDetection::NoClick as i32 => AyDetection::NoClick,
            x if x == CondprepAyDetection::Undetected as i32 => AyDetection::Undetected,
            x => return Err((CondprepStatus::InvalidArgument, format!("detection code {x}"))),
        };
        let model = match model {
            x if x == CondprepVacuumModel::Derived as i32 => VacuumWeightModel::Derived,
            x if x == CondprepVacuumModel::Published as i32 => VacuumWeightModel::Published,
            x => return Err((CondprepStatus::InvalidArgument, format!("model code {x}"))),
        };
        h.0.ay = ay;
        h.0.model = model;
        Ok(())
    })
}

/// Closed-form second-order fidelity.
///
/// # Safety
/// `h` must be null or a live teleport handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn condprep_teleport_fidelity(h: *const CondprepTeleport, out: *mut f64) -> CondprepStatus {
    guard(|| {
        let h = unsafe { in_ref(h, "teleport") }?;
        let out = unsafe { out_ref(out, "out") }?;
        h.0.validate().map_err(lib_err)?;
        *out = experiments::teleport_fidelity_2(&h.0);
        Ok(())
    })
}

/// Fidelity from the full Fock-space simulation (slow for large N).
///
/// # Safety
/// `h` must be null or a live teleport handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn condprep_teleport_simulate(h: *const CondprepTeleport, out: *mut f64) -> CondprepStatus {
    guard(|| {
        let h = unsafe { in_ref(h, "teleport") }?;
        let out = unsafe { out_ref(out, "out") }?;
        let cfg = &h.0;
        let rho = experiments::innsbruck_simulate(cfg).map_err(lib_err)?.evaluate(cfg.p1, cfg.p2).map_err(lib_err)?;
        *out = metrology::fidelity(&rho, &experiments::teleported_state(cfg.theta, cfg.phi)).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `condprep_teleport_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn condprep_teleport_free(h: *mut CondprepTeleport) {
    if !h.is_null() {
        // SAFETY: h came from Box::into_raw.
        drop(unsafe { Box::from_raw(h) });
    }
}

// ------------------------------------------------------------ plain math

/// Single-photon confidence of an N-detector cascade; `n = 0` selects N → ∞.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn condprep_confidence(n: usize, eta2: f64, delta: f64, out: *mut f64) -> CondprepStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        if !(0.0..=1.0).contains(&eta2) || delta.is_nan() || delta < 0.0 {
            return Err((CondprepStatus::OutOfDomain, format!("eta2 = {eta2}, delta = {delta}")));
        }
        *out =
            if n == 0 { metrology::confidence_cascade_limit(eta2, delta) } else { metrology::confidence_cascade(n, eta2, delta) };
        Ok(())
    })
}

/// Deposition rate of the N-photon state with m photons in one beam.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn condprep_deposition(n: u32, m: u32, theta: f64, phi: f64, out: *mut f64) -> CondprepStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        if m > n {
            return Err((CondprepStatus::OutOfDomain, format!("m = {m} exceeds N = {n}")));
        }
        *out = lithography::deposition_general(n, m, theta, phi);
        Ok(())
    })
}

// --------------------------------------------------------------- reports

/// Opaque result of a command-line subcommand.
pub struct CondprepReport {
    report: Report,
    json: CString,
}

/// Runs a subcommand given `argc` NUL-terminated arguments (without the
/// program name), e.g. `{"nport-table", "--n-max", "3"}`.
///
/// # Safety
/// `argv` must point to `argc` valid C strings; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn condprep_report_run(
    argc: usize,
    argv: *const *const c_char,
    out: *mut *mut CondprepReport,
) -> CondprepStatus {
    guard(|| {
        let out = unsafe { out_ref(out, "out") }?;
        if argc > 0 && argv.is_null() {
            return Err(null("argv"));
        }
        let mut args = vec!["condprep".to_string()];
        for i in 0..argc {
            // SAFETY: argv has argc entries.
            let p = unsafe { *argv.add(i) };
            if p.is_null() {
                return Err(null("argument"));
            }
            // SAFETY: non-null NUL-terminated string per contract.
            let s = unsafe { CStr::from_ptr(p) }
                .to_str()
                .map_err(|_| (CondprepStatus::InvalidArgument, "argument is not UTF-8".to_string()))?;
            args.push(s.to_string());
        }
        let report = condprep::cli::build_report(args).map_err(lib_err)?;
        let json = CString::new(report.to_json()).map_err(|_| (CondprepStatus::Internal, "NUL in report".to_string()))?;
        *out = Box::into_raw(Box::new(CondprepReport { report, json }));
        Ok(())
    })
}

/// Whether every check in the report passed (1) or not (0).
///
/// # Safety
/// `h` must be null or a live report handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn condprep_report_passed(h: *const CondprepReport, out: *mut i32) -> CondprepStatus {
    guard(|| {
        let h = unsafe { in_ref(h, "report") }?;
        *unsafe { out_ref(out, "out") }? = i32::from(h.report.passed());
        Ok(())
    })
}

/// JSON text of the report, owned by the handle.
///
/// # Safety
/// `h` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn condprep_report_json(h: *const CondprepReport) -> *const c_char {
    // SAFETY: h is null or a live handle.
    unsafe { h.as_ref() }.map_or(std::ptr::null(), |h| h.json.as_ptr())
}

/// Copies the report in CSV form into `buf` (NUL-terminated). `needed`
/// receives the size including the terminator; BufferTooSmall is returned
/// when `len` is insufficient, so callers may query with a null buffer.
///
/// # Safety
/// `h` must be a live report handle, `buf` null or valid for `len` bytes,
/// `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn condprep_report_csv(
    h: *const CondprepReport,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> CondprepStatus {
    guard(|| {
        let h = unsafe { in_ref(h, "report") }?;
        let csv = h.report.to_csv();
        let size = csv.len() + 1;
        if let Some(n) = unsafe { needed.as_mut() } {
            *n = size;
        }
        if buf.is_null() || len < size {
            return Err((CondprepStatus::BufferTooSmall, format!("{size} bytes needed")));
        }
        // SAFETY: buf has at least size bytes.
        unsafe {
            std::ptr::copy_nonoverlapping(csv.as_ptr().cast::<c_char>(), buf, csv.len());
            *buf.add(csv.len()) = 0;
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from `condprep_report_run` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn condprep_report_free(h: *mut CondprepReport) {
    if !h.is_null() {
        // SAFETY: h came from Box::into_raw.
        drop(unsafe { Box::from_raw(h) });
    }
}
