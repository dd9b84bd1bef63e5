//! Exercises the C ABI the way a foreign binding would: through the exported
//! extern "C" functions and raw pointers only.

use std::ffi::CString;

use approx::assert_relative_eq;
use displace_learn_ffi::*;

fn last_error() -> String {
    let len = dl_last_error_length();
    let mut buf = vec![0i8; len + 1];
    let written = unsafe { dl_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..written].iter().map(|&b| b as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(dl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn effective_squeezing_matches_core() {
    let mut r_eff = 0.0;
    let status = unsafe { dl_effective_squeezing(4.78, 1.0, &mut r_eff) };
    assert_eq!(status, DlStatus::Ok);
    assert_relative_eq!((-2.0 * r_eff).exp(), 10f64.powf(-0.478), max_relative = 1e-12);

    let status = unsafe { dl_effective_squeezing(4.78, 0.0, &mut r_eff) };
    assert_eq!(status, DlStatus::InvalidInput);
    assert!(last_error().contains("transmissivity"));
}

#[test]
fn bound_functions_return_reference_values() {
    let (mut value, mut log10) = (0.0, 0.0);
    let status = unsafe { dl_hoeffding_upper(0.0, 0.18 * 16.0, 0.24, 1.0 / 3.0, &mut value, &mut log10) };
    assert_eq!(status, DlStatus::Ok);
    assert_relative_eq!(value, 109525.135115, max_relative = 1e-9);

    let mut ok = false;
    let status =
        unsafe { dl_classical_lower(100, 1, 0.18, 0.24, 0.0, &mut value, &mut log10, &mut ok) };
    assert_eq!(status, DlStatus::Ok);
    assert!(ok);
    assert_relative_eq!(value, 3.00853887194e12, max_relative = 1e-9);

    // theorem hypotheses violated → inapplicable, not a garbage number
    let status =
        unsafe { dl_classical_lower(7, 1, 0.18, 0.24, 0.0, &mut value, &mut log10, &mut ok) };
    assert_eq!(status, DlStatus::Inapplicable);

    let status =
        unsafe { dl_equivalent_classical_n(0.563, 0.25, 0.2, 0.3, 120, &mut value, &mut log10) };
    assert_eq!(status, DlStatus::Ok);
    assert_relative_eq!(value, 1.51801214716e14, max_relative = 1e-9);

    let (mut p, mut excess) = (0.0, 0.0);
    let status =
        unsafe { dl_classical_success_bound(1e5, 0.25, 0.2, 0.3, 120, &mut p, &mut excess) };
    assert_eq!(status, DlStatus::Ok);
    assert_relative_eq!(excess, 4.15016441849e-11, max_relative = 1e-9);

    let mut seconds = 0.0;
    let status = unsafe { dl_acquisition_time(1.6e14, 120, 1e6, &mut seconds) };
    assert_eq!(status, DlStatus::Ok);
    assert_relative_eq!(seconds, 1.92e10, max_relative = 1e-12);
}

#[test]
fn simulate_estimate_free_round_trip() {
    let process = CString::new(r#"{"kind":"gaussian","n":1,"sigma":0.3}"#).unwrap();
    let mut handle: *mut DlRecordSet = std::ptr::null_mut();
    let status =
        unsafe { dl_simulate_records(process.as_ptr(), 0.0, 1.0, 200_000, 9, &mut handle) };
    assert_eq!(status, DlStatus::Ok);
    assert!(!handle.is_null());
    assert_eq!(unsafe { dl_record_set_len(handle) }, 200_000);
    assert_eq!(unsafe { dl_record_set_modes(handle) }, 1);
    assert_eq!(unsafe { dl_record_set_r_eff(handle) }, 0.0);

    // λ(β) = e⁻¹ at |β|² = 0.18 for the σ = 0.3 Gaussian process
    let beta = [0.18f64.sqrt(), 0.0];
    let (mut re, mut im) = (0.0, 0.0);
    let status = unsafe { dl_estimate_char_fn(handle, beta.as_ptr(), 1, &mut re, &mut im) };
    assert_eq!(status, DlStatus::Ok);
    assert!((re - 0.36788).abs() < 0.01, "re = {re}");
    assert!(im.abs() < 0.01, "im = {im}");

    // corrected with the identity matches exactly
    let identity = [1.0, 0.0, 0.0, 1.0];
    let (mut re2, mut im2) = (0.0, 0.0);
    let status = unsafe {
        dl_estimate_char_fn_corrected(handle, beta.as_ptr(), 1, identity.as_ptr(), &mut re2, &mut im2)
    };
    assert_eq!(status, DlStatus::Ok);
    assert_eq!((re, im), (re2, im2));

    unsafe { dl_record_set_free(handle) };
}

#[test]
fn error_paths_set_messages() {
    let mut handle: *mut DlRecordSet = std::ptr::null_mut();
    let bad = CString::new(r#"{"kind":"nonsense"}"#).unwrap();
    let status = unsafe { dl_simulate_records(bad.as_ptr(), 0.0, 1.0, 10, 1, &mut handle) };
    assert_eq!(status, DlStatus::InvalidInput);
    assert!(last_error().contains("process spec"));

    let status = unsafe { dl_simulate_records(std::ptr::null(), 0.0, 1.0, 10, 1, &mut handle) };
    assert_eq!(status, DlStatus::NullPointer);

    // singular affine through the corrected estimator
    let process = CString::new(r#"{"kind":"gaussian","n":1,"sigma":0.3}"#).unwrap();
    let status = unsafe { dl_simulate_records(process.as_ptr(), 0.0, 1.0, 100, 2, &mut handle) };
    assert_eq!(status, DlStatus::Ok);
    let beta = [0.1, 0.0];
    let singular = [1.0, 1.0, 1.0, 1.0];
    let (mut re, mut im) = (0.0, 0.0);
    let status = unsafe {
        dl_estimate_char_fn_corrected(handle, beta.as_ptr(), 1, singular.as_ptr(), &mut re, &mut im)
    };
    assert_eq!(status, DlStatus::InvalidInput);
    assert!(last_error().contains("singular"));
    unsafe { dl_record_set_free(handle) };

    // freeing null is a no-op
    unsafe { dl_record_set_free(std::ptr::null_mut()) };
}

#[test]
fn generated_header_covers_the_surface() {
    let header = include_str!("../include/displace_learn.h");
    for symbol in [
        "dl_version",
        "dl_effective_squeezing",
        "dl_hoeffding_upper",
        "dl_classical_lower",
        "dl_equivalent_classical_n",
        "dl_classical_success_bound",
        "dl_acquisition_time",
        "dl_simulate_records",
        "dl_record_set_load_csv",
        "dl_record_set_len",
        "dl_record_set_modes",
        "dl_record_set_r_eff",
        "dl_record_set_free",
        "dl_estimate_char_fn",
        "dl_estimate_char_fn_corrected",
        "dl_last_error_message",
        "DlRecordSet",
        "DlStatus",
    ] {
        assert!(header.contains(symbol), "header lacks {symbol}");
    }
}

#[test]
fn c_program_links_and_runs() {
    // compile a minimal C consumer against the staticlib and run it
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let target_dir = manifest.join("../../target/debug");
    let staticlib = target_dir.join("libdisplace_learn_ffi.a");
    assert!(staticlib.exists(), "staticlib not built at {staticlib:?}");
    let dir = tempfile::tempdir().unwrap();
    let c_path = dir.path().join("consumer.c");
    std::fs::write(
        &c_path,
        r#"
#include <stdio.h>
#include "displace_learn.h"

int main(void) {
    double r_eff = 0.0;
    if (dl_effective_squeezing(4.78, 1.0, &r_eff) != DlStatus_Ok) return 1;
    double value = 0.0, log10 = 0.0;
    if (dl_hoeffding_upper(r_eff, 18.0, 0.24, 1.0/3.0, &value, &log10) != DlStatus_Ok) return 2;
    DlRecordSet *set = NULL;
    if (dl_simulate_records("{\"kind\":\"gaussian\",\"n\":1,\"sigma\":0.3}",
                            0.0, 1.0, 1000, 7, &set) != DlStatus_Ok) return 3;
    if (dl_record_set_len(set) != 1000) return 4;
    double beta[2] = {0.42426406871192851, 0.0};
    double re = 0.0, im = 0.0;
    if (dl_estimate_char_fn(set, beta, 1, &re, &im) != DlStatus_Ok) return 5;
    dl_record_set_free(set);
    printf("%.6f %.3f\n", log10, re);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("consumer");
    let compile = std::process::Command::new("cc")
        .arg(&c_path)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(staticlib)
        .arg("-lpthread")
        .arg("-ldl")
        .arg("-lm")
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("cc available");
    assert!(
        compile.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = std::process::Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "consumer exited {:?}", run.status);
    let stdout = String::from_utf8(run.stdout).unwrap();
    // log10 of the hundred-mode Hoeffding bound at 4.78 dB
    let log10: f64 = stdout.split_whitespace().next().unwrap().parse().unwrap();
    assert!((log10 - 7.73898).abs() < 1e-3, "stdout: {stdout}");
}
