use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lpfock_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { lpfock_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n >= 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn matrix_norm_closed_forms() {
    let re = [1.0, -2.0, 3.0, 4.0];
    let im = [0.0, 0.0, 0.0, 0.0];
    let (mut lo, mut hi) = (0.0, 0.0);
    let s = unsafe { lpfock_matrix_norm(2, 2, re.as_ptr(), im.as_ptr(), 1.0, &mut lo, &mut hi) };
    assert_eq!(s, LpfockStatus::Ok);
    // Largest column sum.
    assert!(lo <= 6.0 && 6.0 <= hi && hi - lo < 1e-10);
    let s = unsafe { lpfock_matrix_norm(2, 2, re.as_ptr(), ptr::null(), 2.0, &mut lo, &mut hi) };
    assert_eq!(s, LpfockStatus::Ok);
    let sigma = spectral_norm_2x2(&re);
    assert!(lo <= sigma + 1e-12 && sigma <= hi + 1e-12);
}

/// Largest singular value of a real 2×2 matrix from the eigenvalues of `MᵀM`.
fn spectral_norm_2x2(m: &[f64; 4]) -> f64 {
    let (a, b, c, d) = (m[0], m[1], m[2], m[3]);
    let t = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((t + (t * t - 4.0 * det * det).sqrt()) / 2.0).sqrt()
}

#[test]
fn bad_exponent_is_invalid_argument() {
    let re = [1.0];
    let (mut lo, mut hi) = (0.0, 0.0);
    let s = unsafe { lpfock_matrix_norm(1, 1, re.as_ptr(), ptr::null(), 0.5, &mut lo, &mut hi) };
    assert_eq!(s, LpfockStatus::InvalidArgument);
    assert!(!last_error().is_empty());
}

#[test]
fn null_outputs_are_reported() {
    let re = [1.0];
    let mut hi = 0.0;
    let s = unsafe { lpfock_matrix_norm(1, 1, re.as_ptr(), ptr::null(), 2.0, ptr::null_mut(), &mut hi) };
    assert_eq!(s, LpfockStatus::NullPointer);
    assert!(last_error().contains("lower"));
    let s = unsafe { lpfock_fock_new(2, 2, 2.0, ptr::null_mut()) };
    assert_eq!(s, LpfockStatus::NullPointer);
}

#[test]
fn error_is_cleared_on_success() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lpfock_fock_new(1, 2, 2.0, &mut h) }, LpfockStatus::Library);
    assert!(h.is_null());
    assert_eq!(unsafe { lpfock_fock_new(2, 2, 2.0, &mut h) }, LpfockStatus::Ok);
    assert_eq!(unsafe { lpfock_last_error_message(ptr::null_mut(), 0) }, 0);
    unsafe { lpfock_fock_free(h) };
}

#[test]
fn small_buffer_is_refused() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lpfock_fock_new(0, 2, 2.0, &mut h) }, LpfockStatus::Library);
    let mut buf = [0 as c_char; 4];
    assert_eq!(unsafe { lpfock_last_error_message(buf.as_mut_ptr(), buf.len()) }, -1);
}

#[test]
fn fock_handle_round_trip() {
    for d in 2..=4 {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { lpfock_fock_new(d, 3, 3.0, &mut h) }, LpfockStatus::Ok);
        let dim: usize = (0..=3).map(|n| d.pow(n)).sum();
        assert_eq!(unsafe { lpfock_fock_dim(h) }, dim);
        let (mut r, mut rank) = (1.0, 0);
        assert_eq!(unsafe { lpfock_fock_leavitt(h, &mut r, &mut rank) }, LpfockStatus::Ok);
        assert_eq!(r, 0.0);
        assert_eq!(rank, 1);
        unsafe { lpfock_fock_free(h) };
    }
    assert_eq!(unsafe { lpfock_fock_dim(ptr::null()) }, 0);
    unsafe { lpfock_fock_free(ptr::null_mut()) };
}

#[test]
fn creation_and_annihilation_norms() {
    let p = 3.0;
    let q = p / (p - 1.0);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lpfock_fock_new(2, 2, p, &mut h) }, LpfockStatus::Ok);
    let re = [0.6f64, -0.3];
    let im = [0.2f64, 0.5];
    let norm = |r: f64| -> f64 { (0..2).map(|k| re[k].hypot(im[k]).powf(r)).sum::<f64>().powf(1.0 / r) };
    let (mut lo, mut hi) = (0.0, 0.0);
    let s = unsafe { lpfock_fock_operator_norm(h, re.as_ptr(), im.as_ptr(), false, &mut lo, &mut hi) };
    assert_eq!(s, LpfockStatus::Ok);
    assert!(lo - 1e-9 <= norm(p) && norm(p) <= hi + 1e-9, "{lo} {hi} {}", norm(p));
    let s = unsafe { lpfock_fock_operator_norm(h, re.as_ptr(), im.as_ptr(), true, &mut lo, &mut hi) };
    assert_eq!(s, LpfockStatus::Ok);
    assert!(lo - 1e-9 <= norm(q) && norm(q) <= hi + 1e-9, "{lo} {hi} {}", norm(q));
    unsafe { lpfock_fock_free(h) };
}

#[test]
fn crossed_builtin_and_json() {
    let name = CString::new("m2-swap").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { lpfock_crossed_builtin(name.as_ptr(), 2.0, 3, &mut h) }, LpfockStatus::Ok);
    assert_eq!(unsafe { lpfock_crossed_dim(h) }, 4 * 2);
    let mut r = 1.0;
    assert_eq!(unsafe { lpfock_crossed_relations(h, 4, &mut r) }, LpfockStatus::Ok);
    assert_eq!(r, 0.0);
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { lpfock_crossed_report(h, 4, &mut report) }, LpfockStatus::Ok);
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    unsafe { lpfock_string_free(report) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    unsafe { lpfock_crossed_free(h) };

    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/systems");
    let alg = CString::new(std::fs::read_to_string(root.join("diag3.json")).unwrap()).unwrap();
    let phi = CString::new(std::fs::read_to_string(root.join("cyclic3.json")).unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { lpfock_crossed_from_json(alg.as_ptr(), phi.as_ptr(), 1.5, 4, &mut h) },
        LpfockStatus::Ok
    );
    assert_eq!(unsafe { lpfock_crossed_dim(h) }, 5 * 3);
    unsafe { lpfock_crossed_free(h) };
}

#[test]
fn crossed_rejects_bad_inputs() {
    let mut h = ptr::null_mut();
    let name = CString::new("unknown").unwrap();
    assert_eq!(unsafe { lpfock_crossed_builtin(name.as_ptr(), 2.0, 3, &mut h) }, LpfockStatus::Library);
    assert!(last_error().contains("unknown"));
    let bad = [0xffu8 as c_char, 0];
    assert_eq!(unsafe { lpfock_crossed_builtin(bad.as_ptr(), 2.0, 3, &mut h) }, LpfockStatus::InvalidUtf8);
    let alg = CString::new("{\"basis\": []}").unwrap();
    let phi = CString::new("{\"permutation\": []}").unwrap();
    assert_eq!(
        unsafe { lpfock_crossed_from_json(alg.as_ptr(), phi.as_ptr(), 2.0, 3, &mut h) },
        LpfockStatus::Library
    );
    assert!(h.is_null());
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

fn cc() -> Option<String> {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    Command::new(&cc).arg("--version").output().ok().map(|_| cc)
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    for lang in ["c", "c++"] {
        let out = Command::new(&cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(include.join("lpfock.h"))
            .output()
            .unwrap();
        assert!(out.status.success(), "{lang}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_static_library() {
    let Some(cc) = cc() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    let lib = target_dir().join("liblpfock_ffi.a");
    assert!(lib.exists(), "{}", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::temp_dir().join(format!("lpfock-smoke-{}", std::process::id()));
    let out = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok 0.1.0"));
}
