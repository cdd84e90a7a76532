use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use upset_poincare_ffi::*;

fn parse(desc: &str) -> *mut UpMonotoneSet {
    let c = CString::new(desc).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { up_set_parse(c.as_ptr(), &mut out) }, UpStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(up_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn set_lifecycle_and_queries() {
    let s = parse("threshold 4 2");
    let mut info = UpSetInfo::default();
    assert_eq!(unsafe { up_set_info(s, &mut info) }, UpStatus::Ok);
    assert_eq!((info.dim, info.size), (4, 11));

    let mut inside = false;
    assert_eq!(unsafe { up_set_contains(s, 0b0011, &mut inside) }, UpStatus::Ok);
    assert!(inside);
    assert_eq!(unsafe { up_set_contains(s, 0b0100, &mut inside) }, UpStatus::Ok);
    assert!(!inside);
    assert_eq!(unsafe { up_set_contains(s, 1 << 40, &mut inside) }, UpStatus::Ok);
    assert!(!inside);

    let mut len = 0usize;
    assert_eq!(unsafe { up_set_members(s, ptr::null_mut(), 0, &mut len) }, UpStatus::Ok);
    let mut buf = vec![0u32; len];
    assert_eq!(unsafe { up_set_members(s, buf.as_mut_ptr(), buf.len(), &mut len) }, UpStatus::Ok);
    assert!(buf.iter().all(|x| x.count_ones() >= 2) && buf.windows(2).all(|w| w[0] < w[1]));
    unsafe { up_set_free(s) };
    unsafe { up_set_free(ptr::null_mut()) };
}

#[test]
fn forms_and_spectral() {
    let s = parse("upset 2 01");
    // members 01 and 11: the dictator on the first coordinate is constant
    let v = [0.0, 1.0];
    let (mut e, mut var) = (0.0, 0.0);
    assert_eq!(unsafe { up_dirichlet_form(s, v.as_ptr(), 2, &mut e) }, UpStatus::Ok);
    assert_eq!(unsafe { up_variance(s, v.as_ptr(), 2, &mut var) }, UpStatus::Ok);
    assert_eq!((e, var), (0.25, 0.25));
    assert_eq!(unsafe { up_dirichlet_form(s, v.as_ptr(), 3, &mut e) }, UpStatus::InvalidArgument);

    let mut sp = UpSpectral::default();
    assert_eq!(unsafe { up_poincare_constant(s, &mut sp) }, UpStatus::Ok);
    assert!((sp.lambda2 - 2.0).abs() < 1e-12 && !sp.iterative);
    unsafe { up_set_free(s) };

    let single = parse("threshold 3 3");
    assert_eq!(unsafe { up_poincare_constant(single, &mut sp) }, UpStatus::Ok);
    assert_eq!(sp.cstar, 0.0);
    unsafe { up_set_free(single) };
}

#[test]
fn mixing_and_laziness() {
    let s = parse("threshold 3 2");
    let mut m = UpMixing::default();
    assert_eq!(unsafe { up_exact_tmix(s, 0.5, 0.25, &mut m) }, UpStatus::Ok);
    assert_eq!(m.bound_spectral, 17);
    assert!(m.t_mix <= 17 && m.exhaustive);
    assert_eq!(unsafe { up_exact_tmix(s, 0.1, 0.25, &mut m) }, UpStatus::InvalidArgument);
    assert!(last_error().contains("laziness"));
    unsafe { up_set_free(s) };
}

#[test]
fn induction_scalars() {
    let p = UpInductionParams { a0: 0.5, a1: 1.0, alpha: 0.0, beta: 1.0, gamma: 0.0, c: 0.5 };
    let mut fp = UpFivePoint::default();
    assert_eq!(unsafe { up_five_point(&p, &mut fp) }, UpStatus::Ok);
    assert!(fp.holds && (fp.lhs - 0.125).abs() < 1e-15);

    let bad = UpInductionParams { a0: 0.0, a1: 0.0, ..p };
    assert_eq!(unsafe { up_five_point(&bad, &mut fp) }, UpStatus::InvalidArgument);

    let mut d = 0.0;
    assert_eq!(unsafe { up_discriminant(0.5, 0.5, 0.5, &mut d) }, UpStatus::Ok);
    assert!(d < 0.0);
    assert_eq!(unsafe { up_g_psd_margin(1.0, 1.0, &mut d) }, UpStatus::Ok);
    assert_eq!(d, 0.0);
    assert_eq!(unsafe { up_g_psd_margin(0.9, 0.1, &mut d) }, UpStatus::InvalidArgument);
}

#[test]
fn error_codes() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { up_set_parse(ptr::null(), &mut out) }, UpStatus::NullPointer);
    let bad = CString::new("cube 3").unwrap();
    assert_eq!(unsafe { up_set_parse(bad.as_ptr(), &mut out) }, UpStatus::Parse);
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { up_set_threshold(40, 2, &mut out) }, UpStatus::Dimension);
    let members = [0b01u32];
    assert_eq!(unsafe { up_set_from_members(2, members.as_ptr(), 1, &mut out) }, UpStatus::NotMonotone);
    assert!(out.is_null());
    let mut count = 0u64;
    assert_eq!(unsafe { up_enumerate_count(4, &mut count) }, UpStatus::Ok);
    assert_eq!(count, 167);
    assert_eq!(unsafe { up_enumerate_count(6, &mut count) }, UpStatus::Dimension);
    assert_eq!(unsafe { up_set_info(ptr::null(), ptr::null_mut()) }, UpStatus::NullPointer);
}

#[test]
fn header_matches_exports() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/upset_poincare.h")).unwrap();
    for f in ["up_set_parse", "up_set_free", "up_poincare_constant", "up_exact_tmix", "up_last_error_message"] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    assert!(header.contains("typedef struct UpMonotoneSet UpMonotoneSet;"));
}

/// Builds the static library, then compiles and runs a C program against
/// the generated header. Skipped when no C compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let target = std::env::var("CARGO_TARGET_DIR").map(PathBuf::from).unwrap_or_else(|_| manifest.join("../../target"));
    let scratch = tempfile::tempdir().unwrap();
    // a separate target dir keeps this nested build off the outer build lock
    let status = Command::new(&cargo)
        .args(["build", "--quiet", "--lib", "-p", "upset-poincare-ffi", "--target-dir"])
        .arg(target.join("ffi-smoke"))
        .current_dir(&manifest)
        .status()
        .unwrap();
    assert!(status.success());
    let lib_dir = target.join("ffi-smoke/debug");
    let exe = scratch.path().join("smoke");
    let out = Command::new(&cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(lib_dir.join("libupset_poincare_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
