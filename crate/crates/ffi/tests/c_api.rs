use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use smoothball_ffi::*;

fn last_error() -> String {
    let p = sb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn model(kind: &str, nu: f64, cutoff: f64) -> *mut SbModel {
    let kind = CString::new(kind).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { sb_model_new(kind.as_ptr(), nu, f64::NAN, cutoff, &mut m) }, SbStatus::Ok);
    m
}

#[test]
fn model_lifecycle_and_covariance() {
    let m = model("continuous", 1.0, f64::NAN);
    let mut v = 0.0;
    assert_eq!(unsafe { sb_model_covariance(m, 0.5, &mut v) }, SbStatus::Ok);
    assert!((v - 2.0 / 1.25).abs() < 1e-10);
    let mut mass = 0.0;
    assert_eq!(unsafe { sb_model_total_mass(m, &mut mass) }, SbStatus::Ok);
    assert!((mass - 2.0).abs() < 1e-12);
    unsafe { sb_model_free(m) };
    unsafe { sb_model_free(ptr::null_mut()) };
}

#[test]
fn errors_carry_status_and_message() {
    let kind = CString::new("continuous").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { sb_model_new(kind.as_ptr(), -1.0, f64::NAN, f64::NAN, &mut m) }, SbStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(last_error().contains("nu"));
    assert_eq!(unsafe { sb_model_new(ptr::null(), 1.0, f64::NAN, f64::NAN, &mut m) }, SbStatus::NullPointer);
    assert_eq!(unsafe { sb_exact_l2(1.0, 4, 1.0, ptr::null_mut()) }, SbStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(unsafe { sb_asymptotic_constant(-1.0, &mut v) }, SbStatus::InvalidArgument);
}

#[test]
fn sampler_is_reproducible() {
    let m = model("discrete", 1.0, f64::NAN);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { sb_sampler_new(m, 1.0, 33, 8, &mut s) }, SbStatus::Ok);
    let mut n = 0usize;
    assert_eq!(unsafe { sb_sampler_len(s, &mut n) }, SbStatus::Ok);
    assert_eq!(n, 33);
    let mut a = vec![0.0; 33];
    let mut b = vec![0.0; 33];
    assert_eq!(unsafe { sb_sampler_path(s, 5, 3, a.as_mut_ptr(), 33) }, SbStatus::Ok);
    assert_eq!(unsafe { sb_sampler_path(s, 5, 3, b.as_mut_ptr(), 33) }, SbStatus::Ok);
    assert_eq!(a, b);
    // period-1 paths
    assert!((a[0] - a[32]).abs() < 1e-12);
    assert_eq!(unsafe { sb_sampler_path(s, 5, 3, a.as_mut_ptr(), 10) }, SbStatus::InvalidArgument);

    let radii = [0.5, 1.0, 2.0];
    let mut est = [SbEstimate::default(); 3];
    assert_eq!(unsafe { sb_smallball_estimate(s, 1, radii.as_ptr(), 3, 20_000, 7, est.as_mut_ptr()) }, SbStatus::Ok);
    for (e, &r) in est.iter().zip(&radii) {
        let mut p = 0.0;
        assert_eq!(unsafe { sb_exact_l2(1.0, 8, r, &mut p) }, SbStatus::Ok);
        let se = (p * (1.0 - p) / 20_000.0).sqrt();
        assert!((e.p_hat - p).abs() <= 4.0 * se, "r={r}: {} vs {p}", e.p_hat);
    }
    unsafe {
        sb_sampler_free(s);
        sb_model_free(m);
    }
}

#[test]
fn bounds_and_certificates() {
    let mut b = SbLowerBound::default();
    assert_eq!(unsafe { sb_tsirelson_bound_opt(1.0, true, 1e-100, false, false, &mut b) }, SbStatus::Ok);
    let ratio = b.phi_lower / 1e-100f64.ln().powi(2);
    assert!((ratio / (1.0 / (4.0 * std::f64::consts::PI)) - 1.0).abs() < 0.05);
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(unsafe { sb_entropy_bracket(1.0, 20, 0.25, &mut lo, &mut hi) }, SbStatus::Ok);
    assert!(0.0 < lo && lo <= hi);
    let mut g = SbGCertificate::default();
    assert_eq!(unsafe { sb_g_certify(0.5, 10.0, 200.0, 0.1, &mut g) }, SbStatus::Ok);
    assert!(g.theta_g > 0.0 && g.bounded_by_one);
    let r: Vec<f64> = (0..20).map(|i| 10f64.powf(-3.0 - i as f64)).collect();
    let phi: Vec<f64> = r.iter().map(|x| x.ln().powi(2)).collect();
    let mut f = SbRateFit::default();
    assert_eq!(unsafe { sb_fit(r.as_ptr(), phi.as_ptr(), 20, 0.0, &mut f) }, SbStatus::Ok);
    assert!(!f.refused && (f.gamma - 2.0).abs() < 1e-9);
    assert_eq!(unsafe { sb_fit(r.as_ptr(), phi.as_ptr(), 2, f64::NAN, &mut f) }, SbStatus::Ok);
    assert!(f.refused);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/smoothball.h")).unwrap();
    for name in ["sb_model_new", "sb_sampler_path", "sb_smallball_estimate", "sb_last_error", "SB_STATUS_OK", "typedef struct SbModel SbModel"] {
        assert!(header.contains(name), "{name}");
    }
}

/// Builds the static library into a scratch target directory, compiles
/// `tests/c/smoke.c` against it and runs the program.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let scratch = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("staticlib");
    let built = Command::new(env!("CARGO"))
        .args(["build", "--offline", "--quiet", "-p", "smoothball-ffi", "--lib", "--target-dir"])
        .arg(&scratch)
        .current_dir(&manifest)
        .status()
        .expect("cargo runs");
    assert!(built.success());
    let lib = scratch.join("debug").join("libsmoothball_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let bin = scratch.join("smoke");
    let status = Command::new("cc")
        .args(["-std=c11", "-D_DEFAULT_SOURCE", "-I"])
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler is on PATH");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("ok\n"));
}
