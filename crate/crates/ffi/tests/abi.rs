use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use conjmax_ffi::*;

fn parse(text: &str) -> (CmStatus, *mut CmTrigPoly) {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { cm_poly_parse(c.as_ptr(), &mut out) };
    (st, out)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cm_last_error_message()) }.to_string_lossy().into_owned()
}

fn to_text(p: *const CmTrigPoly) -> String {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_to_text(p, &mut s) }, CmStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { cm_string_free(s) };
    text
}

#[test]
fn text_round_trip_and_accessors() {
    let (st, p) = parse("dim 2\n1 0 0.5 0\n-1 0 0.5 0\n");
    assert_eq!(st, CmStatus::Ok);
    assert_eq!(unsafe { cm_poly_dim(p) }, 2);
    assert_eq!(unsafe { cm_poly_num_terms(p) }, 2);
    let (st, q) = parse(&to_text(p));
    assert_eq!(st, CmStatus::Ok);
    assert_eq!(to_text(p), to_text(q));
    unsafe {
        cm_poly_free(p);
        cm_poly_free(q);
    }
}

#[test]
fn from_terms_sums_duplicates() {
    let freqs = [3, 3];
    let (re, im) = ([1.0, -1.0], [0.0, 0.0]);
    let mut p = ptr::null_mut();
    let st = unsafe { cm_poly_from_terms(1, 2, freqs.as_ptr(), re.as_ptr(), im.as_ptr(), &mut p) };
    assert_eq!(st, CmStatus::Ok);
    assert_eq!(unsafe { cm_poly_num_terms(p) }, 0);
    unsafe { cm_poly_free(p) };
}

#[test]
fn operators_through_the_abi() {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_random_real(3, 2, 42, true, &mut f) }, CmStatus::Ok);

    let mut pieces = Vec::new();
    for j in 0..=3 {
        let mut d = ptr::null_mut();
        assert_eq!(unsafe { cm_poly_mart_diff(f, j, &mut d) }, CmStatus::Ok);
        pieces.push(d);
    }
    let total: usize = pieces.iter().map(|&d| unsafe { cm_poly_num_terms(d) }).sum();
    assert_eq!(total, unsafe { cm_poly_num_terms(f) });

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_cond_expect(f, 3, &mut e) }, CmStatus::Ok);
    assert_eq!(to_text(e), to_text(f));

    let mut g = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_analytic_completion(f, &mut g) }, CmStatus::Ok);
    let mut g2 = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_multiply(g, g, &mut g2) }, CmStatus::Ok);
    let mut analytic = false;
    assert_eq!(unsafe { cm_poly_is_analytic(g2, &mut analytic) }, CmStatus::Ok);
    assert!(analytic);

    let mut h1 = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_conjugate_j(f, 1, &mut h1) }, CmStatus::Ok);

    let mut w = CmWeakRatio::default();
    assert_eq!(unsafe { cm_weak_type_ratio(f, 16, &mut w) }, CmStatus::Ok);
    assert_eq!((w.dim, w.res), (3, 16));
    assert!(w.ratio > 0.0 && w.ratio.is_finite());

    for p in pieces.into_iter().chain([f, e, g, g2, h1]) {
        unsafe { cm_poly_free(p) };
    }
}

#[test]
fn error_codes_and_messages() {
    let (st, p) = parse("dim 2\n1 0.5 0\n");
    assert_eq!(st, CmStatus::Parse);
    assert!(p.is_null());
    assert!(last_error().contains("line 2"), "{}", last_error());

    let (_, f) = parse("dim 1\n2 1 0\n-2 1 0\n");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_conjugate_j(f, 2, &mut out) }, CmStatus::OutOfRange);
    assert!(out.is_null());
    let mut w = CmWeakRatio::default();
    assert_eq!(unsafe { cm_weak_type_ratio(f, 4, &mut w) }, CmStatus::ResolutionTooLow);

    let (re, im) = ([2.0], [0.0]);
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(
        unsafe { cm_poly_evaluate(f, re.as_ptr(), im.as_ptr(), 1, &mut a, &mut b) },
        CmStatus::OutsidePolydisk
    );
    assert_eq!(
        unsafe { cm_poly_evaluate(f, re.as_ptr(), im.as_ptr(), 0, &mut a, &mut b) },
        CmStatus::DimensionMismatch
    );

    let (_, z) = parse("dim 1\n");
    assert_eq!(unsafe { cm_weak_type_ratio(z, 16, &mut w) }, CmStatus::ZeroPolynomial);
    let (_, c) = parse("dim 1\n1 0 1\n");
    assert_eq!(unsafe { cm_weak_type_ratio(c, 16, &mut w) }, CmStatus::NotReal);

    assert_eq!(unsafe { cm_poly_conjugate_h(ptr::null(), &mut out) }, CmStatus::NullPointer);
    assert_eq!(unsafe { cm_poly_conjugate_h(f, ptr::null_mut()) }, CmStatus::NullPointer);
    assert_eq!(unsafe { cm_poly_parse(ptr::null(), &mut out) }, CmStatus::NullPointer);
    assert_eq!(unsafe { cm_poly_dim(ptr::null()) }, 0);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { cm_poly_random_real(0, 2, 1, true, &mut r) }, CmStatus::InvalidArgument);

    for p in [f, z, c] {
        unsafe { cm_poly_free(p) };
    }
    unsafe { cm_poly_free(ptr::null_mut()) };
}

#[test]
fn exit_simulation() {
    let mut e = CmExit::default();
    assert_eq!(unsafe { cm_simulate_exit(7, 1e-3, 50.0, &mut e) }, CmStatus::Ok);
    assert!((e.exit_re.hypot(e.exit_im) - 1.0).abs() < 1e-15);
    assert!(e.tau > 0.0 && e.n_samples >= 2);
    assert_eq!(unsafe { cm_simulate_exit(7, 1e-3, 1e-3, &mut e) }, CmStatus::CapHit);
    assert_eq!(unsafe { cm_simulate_exit(7, -1.0, 50.0, &mut e) }, CmStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Directory holding the shared library built alongside this test binary.
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/conjmax.h")).unwrap();
    for name in [
        "typedef struct CmTrigPoly CmTrigPoly;",
        "CM_STATUS_OK = 0",
        "cm_poly_parse(",
        "cm_poly_conjugate_h(",
        "cm_weak_type_ratio(",
        "cm_last_error_message(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_program_links_against_the_shared_library() {
    let dir = lib_dir();
    let so = dir.join("libconjmax_ffi.so");
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    if !so.exists() {
        eprintln!("{} not built; skipping", so.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new(cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-L")
        .arg(&dir)
        .args(["-lconjmax_ffi", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).env("LD_LIBRARY_PATH", &dir).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
