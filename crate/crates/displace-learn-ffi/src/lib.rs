//! C ABI for the displace-learn toolkit.
//!
//! Conventions:
//!
//! * Every fallible function returns [`DlStatus`]; `DL_STATUS_OK` (0) means
//!   success. On failure a thread-local message is set; fetch it with
//!   [`dl_last_error_message`].
//! * Record sets are opaque handles created by [`dl_simulate_records`] or
//!   [`dl_record_set_load_csv`] and released with [`dl_record_set_free`].
//! * Complex vectors cross the boundary as interleaved doubles
//!   `[re0, im0, re1, im1, ...]` of length 2·n.
//! * Process specifications cross as the toolkit's JSON wire format, e.g.
//!   `{"kind":"gaussian","n":4,"sigma":0.3}`.
//!
//! The header `include/displace_learn.h` is generated from this file at
//! build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;

use displace_learn::bounds;
use displace_learn::complex_vec::ComplexVec;
use displace_learn::estimator;
use displace_learn::io;
use displace_learn::measurement::{simulate_bell_batch, DriftModel, RecordBatch, SqueezingSpec};
use displace_learn::process::ProcessSpec;

/// Result of a C-ABI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DlStatus {
    /// Success.
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// Arguments violated a precondition.
    InvalidInput = 2,
    /// A bound was queried outside its hypotheses.
    Inapplicable = 3,
    /// File input/output failed.
    Io = 4,
    /// Internal panic caught at the boundary.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &displace_learn::Error) -> DlStatus {
    match err {
        displace_learn::Error::Inapplicable(_) => DlStatus::Inapplicable,
        displace_learn::Error::Io(_) => DlStatus::Io,
        _ => DlStatus::InvalidInput,
    }
}

fn fail(err: displace_learn::Error) -> DlStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs a closure, catching panics so they never unwind across the boundary.
fn guarded<F: FnOnce() -> DlStatus + std::panic::UnwindSafe>(f: F) -> DlStatus {
    match std::panic::catch_unwind(f) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            DlStatus::Panic
        }
    }
}

/// Opaque record-set handle: a batch of Bell records plus the effective
/// squeezing its noise was simulated at.
pub struct DlRecordSet {
    batch: RecordBatch,
    r_eff: f64,
}

/// Length in bytes (excluding the terminator) of the last error message on
/// this thread.
#[no_mangle]
pub extern "C" fn dl_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` (UTF-8, NUL-terminated).
/// Returns the number of bytes written excluding the terminator, or 0 when
/// `buf` is null or too small.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if msg.len() + 1 > len {
            return 0;
        }
        ptr::copy_nonoverlapping(msg.as_ptr(), buf as *mut u8, msg.len());
        *buf.add(msg.len()) = 0;
        msg.len()
    })
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Effective squeezing after loss:
/// r_eff = −½·log(10^(−dB/10) + (1 − T_a)/T_a).
///
/// # Safety
/// `out_r_eff` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_effective_squeezing(
    squeezing_db: f64,
    transmissivity: f64,
    out_r_eff: *mut f64,
) -> DlStatus {
    guarded(|| {
        if out_r_eff.is_null() {
            set_error("out_r_eff is null");
            return DlStatus::NullPointer;
        }
        match SqueezingSpec::new(squeezing_db, transmissivity) {
            Ok(s) => {
                *out_r_eff = s.effective_squeezing();
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Hoeffding sampling-complexity upper bound
/// 8·exp(2·e^(−2·r_eff)·|β|²)·ε⁻²·ln(4/δ).
///
/// # Safety
/// `out_value` and `out_log10` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dl_hoeffding_upper(
    r_eff: f64,
    beta_sq: f64,
    epsilon: f64,
    delta: f64,
    out_value: *mut f64,
    out_log10: *mut f64,
) -> DlStatus {
    guarded(|| {
        if out_value.is_null() || out_log10.is_null() {
            set_error("output pointer is null");
            return DlStatus::NullPointer;
        }
        match bounds::hoeffding_upper(r_eff, beta_sq, epsilon, delta) {
            Ok(b) => {
                *out_value = b.value;
                *out_log10 = b.log10;
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Entanglement-free lower bound 0.01·ε⁻²·(1 + 1.98κ/(1 + 2σ²))^(mn).
/// `out_hypothesis_ok` reports whether the width condition on σ holds.
///
/// # Safety
/// The three output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn dl_classical_lower(
    m: u64,
    n: u64,
    kappa: f64,
    epsilon: f64,
    sigma: f64,
    out_value: *mut f64,
    out_log10: *mut f64,
    out_hypothesis_ok: *mut bool,
) -> DlStatus {
    guarded(|| {
        if out_value.is_null() || out_log10.is_null() || out_hypothesis_ok.is_null() {
            set_error("output pointer is null");
            return DlStatus::NullPointer;
        }
        match bounds::classical_lower(m, n, kappa, epsilon, sigma) {
            Ok(b) => {
                *out_value = b.bound.value;
                *out_log10 = b.bound.log10;
                *out_hypothesis_ok = b.hypothesis_ok;
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Classical samples matching a measured success probability:
/// (2·P − 1)/(16ε₀²)·(1 + 1.98κ/(1 + 2σ²))ⁿ.
///
/// # Safety
/// `out_value` and `out_log10` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dl_equivalent_classical_n(
    p_suc: f64,
    epsilon0: f64,
    kappa: f64,
    sigma: f64,
    n: u64,
    out_value: *mut f64,
    out_log10: *mut f64,
) -> DlStatus {
    guarded(|| {
        if out_value.is_null() || out_log10.is_null() {
            set_error("output pointer is null");
            return DlStatus::NullPointer;
        }
        match bounds::equivalent_classical_n(p_suc, epsilon0, kappa, sigma, n) {
            Ok(b) => {
                *out_value = b.value;
                *out_log10 = b.log10;
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Success ceiling of entanglement-free strategies with N samples,
/// clamped to 1; `out_excess` is the advantage term above ½.
///
/// # Safety
/// `out_p` and `out_excess` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dl_classical_success_bound(
    n_samples: f64,
    epsilon0: f64,
    kappa: f64,
    sigma: f64,
    n: u64,
    out_p: *mut f64,
    out_excess: *mut f64,
) -> DlStatus {
    guarded(|| {
        if out_p.is_null() || out_excess.is_null() {
            set_error("output pointer is null");
            return DlStatus::NullPointer;
        }
        match bounds::classical_success_bound(n_samples, epsilon0, kappa, sigma, n) {
            Ok(b) => {
                *out_p = b.p;
                *out_excess = b.excess;
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Acquisition wall-clock seconds for N samples of an n-mode process at
/// `mode_rate_hz` modes per second.
///
/// # Safety
/// `out_seconds` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_acquisition_time(
    n_samples: f64,
    n_modes: u64,
    mode_rate_hz: f64,
    out_seconds: *mut f64,
) -> DlStatus {
    guarded(|| {
        if out_seconds.is_null() {
            set_error("out_seconds is null");
            return DlStatus::NullPointer;
        }
        match bounds::acquisition_time(n_samples, n_modes, mode_rate_hz) {
            Ok(s) => {
                *out_seconds = s;
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Simulates `count` Bell records of the JSON-described process under ideal
/// drift. The returned handle owns the records; free it with
/// [`dl_record_set_free`].
///
/// # Safety
/// `process_json` must be a NUL-terminated string and `out_handle` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_simulate_records(
    process_json: *const c_char,
    squeezing_db: f64,
    transmissivity: f64,
    count: usize,
    seed: u64,
    out_handle: *mut *mut DlRecordSet,
) -> DlStatus {
    guarded(|| {
        if process_json.is_null() || out_handle.is_null() {
            set_error("null pointer argument");
            return DlStatus::NullPointer;
        }
        let json = match CStr::from_ptr(process_json).to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("process_json is not valid UTF-8");
                return DlStatus::InvalidInput;
            }
        };
        let process: ProcessSpec = match serde_json::from_str(json) {
            Ok(p) => p,
            Err(e) => {
                set_error(format!("process spec: {e}"));
                return DlStatus::InvalidInput;
            }
        };
        let squeezing = match SqueezingSpec::new(squeezing_db, transmissivity) {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match simulate_bell_batch(&process, &squeezing, &DriftModel::identity(), count, seed) {
            Ok(batch) => {
                let handle = Box::new(DlRecordSet {
                    batch,
                    r_eff: squeezing.effective_squeezing(),
                });
                *out_handle = Box::into_raw(handle);
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads a record CSV written by the toolkit. The effective squeezing is
/// read from the metadata sidecar `<path with .meta.json>` when present,
/// else 0.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_handle` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dl_record_set_load_csv(
    path: *const c_char,
    out_handle: *mut *mut DlRecordSet,
) -> DlStatus {
    guarded(|| {
        if path.is_null() || out_handle.is_null() {
            set_error("null pointer argument");
            return DlStatus::NullPointer;
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(s) => Path::new(s),
            Err(_) => {
                set_error("path is not valid UTF-8");
                return DlStatus::InvalidInput;
            }
        };
        let batch = match io::read_records_csv(path) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        let meta_path = path.with_extension("meta.json");
        let r_eff = if meta_path.exists() {
            match io::read_json::<io::RunMetadata>(&meta_path) {
                Ok(meta) => meta.r_eff,
                Err(e) => return fail(e),
            }
        } else {
            0.0
        };
        *out_handle = Box::into_raw(Box::new(DlRecordSet { batch, r_eff }));
        DlStatus::Ok
    })
}

/// Number of records in the set; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dl_record_set_len(handle: *const DlRecordSet) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).batch.len()
}

/// Modes per record; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dl_record_set_modes(handle: *const DlRecordSet) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).batch.modes()
}

/// Effective squeezing the set was simulated (or loaded) with.
///
/// # Safety
/// `handle` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dl_record_set_r_eff(handle: *const DlRecordSet) -> f64 {
    if handle.is_null() {
        return f64::NAN;
    }
    (*handle).r_eff
}

/// Releases a record set. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a live handle from this library; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dl_record_set_free(handle: *mut DlRecordSet) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn beta_from_raw(beta: *const f64, n_modes: usize) -> Option<ComplexVec> {
    if beta.is_null() || n_modes == 0 {
        return None;
    }
    let raw = std::slice::from_raw_parts(beta, 2 * n_modes);
    let components = raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    ComplexVec::new(components).ok()
}

/// Evaluates the unbiased characteristic-function estimator at β
/// (interleaved `[re, im] × n_modes`) using the handle's r_eff.
///
/// # Safety
/// `handle` must be a live handle; `beta` must hold 2·n_modes doubles;
/// `out_re`/`out_im` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dl_estimate_char_fn(
    handle: *const DlRecordSet,
    beta: *const f64,
    n_modes: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DlStatus {
    dl_estimate_char_fn_corrected(
        handle,
        beta,
        n_modes,
        [[1.0, 0.0], [0.0, 1.0]].as_ptr() as *const f64,
        out_re,
        out_im,
    )
}

/// Drift-corrected estimator; `affine` is the measured 2×2 distortion in
/// row-major order.
///
/// # Safety
/// As [`dl_estimate_char_fn`], plus `affine` must hold 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn dl_estimate_char_fn_corrected(
    handle: *const DlRecordSet,
    beta: *const f64,
    n_modes: usize,
    affine: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DlStatus {
    guarded(|| {
        if handle.is_null() || out_re.is_null() || out_im.is_null() || affine.is_null() {
            set_error("null pointer argument");
            return DlStatus::NullPointer;
        }
        let set = &*handle;
        let Some(beta) = beta_from_raw(beta, n_modes) else {
            set_error("beta must hold 2·n_modes finite doubles");
            return DlStatus::InvalidInput;
        };
        let a = std::slice::from_raw_parts(affine, 4);
        let matrix = [[a[0], a[1]], [a[2], a[3]]];
        match estimator::estimate_char_fn_corrected(&set.batch, &beta, set.r_eff, &matrix) {
            Ok(lambda) => {
                *out_re = lambda.re;
                *out_im = lambda.im;
                DlStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
