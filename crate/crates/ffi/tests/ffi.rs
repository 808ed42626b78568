use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use billiard_ffi::*;

fn body(json: &str) -> *mut BilliardBody {
    let text = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { billiard_body_from_json(text.as_ptr(), &mut out) };
    assert_eq!(status, BilliardStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = billiard_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn body_constants() {
    let b = body(r#"{"type":"capsule","dim":8,"half_length":4.0,"radius":1.0}"#);
    let (mut n, mut c, mut d) = (0usize, 0.0, 0.0);
    unsafe {
        assert_eq!(billiard_body_dim(b, &mut n), BilliardStatus::Ok);
        assert_eq!(billiard_body_curvature_bound(b, &mut c), BilliardStatus::Ok);
        assert_eq!(billiard_body_diameter(b, &mut d), BilliardStatus::Ok);
        billiard_body_free(b);
    }
    assert_eq!((n, c, d), (8, 1.0, 10.0));
}

#[test]
fn malformed_body_reports_error() {
    let text = CString::new(r#"{"type":"ball","dim":1,"radius":1.0}"#).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe { billiard_body_from_json(text.as_ptr(), &mut out) };
    assert_eq!(status, BilliardStatus::InvalidInput);
    assert!(out.is_null());
    assert!(last_error().contains("dimension"));

    let status = unsafe { billiard_body_from_json(ptr::null(), &mut out) };
    assert_eq!(status, BilliardStatus::NullPointer);
}

#[test]
fn kernel_on_circle() {
    let b = body(r#"{"type":"ball","dim":2,"radius":1.0}"#);
    let u = [1.0, 0.0];
    let v = [-1.0, 0.0];
    let mut k = 0.0;
    unsafe {
        assert_eq!(billiard_kernel_density(b, u.as_ptr(), v.as_ptr(), 2, false, &mut k), BilliardStatus::Ok);
        assert!((k - 0.5).abs() < 1e-15);
        assert_eq!(billiard_kernel_density(b, u.as_ptr(), u.as_ptr(), 2, false, &mut k), BilliardStatus::Singularity);
        let off = [0.5, 0.0];
        assert_eq!(billiard_kernel_density(b, u.as_ptr(), off.as_ptr(), 2, false, &mut k), BilliardStatus::NotOnBoundary);
        assert_eq!(billiard_kernel_density(b, u.as_ptr(), v.as_ptr(), 3, false, &mut k), BilliardStatus::InvalidInput);
        billiard_body_free(b);
    }
}

#[test]
fn normal_cdf_closed_form() {
    let mut p = 0.0;
    let t = 0.3;
    let status = unsafe { billiard_normal_component_cdf(t, 10, BilliardLaw::Cosine, &mut p) };
    assert_eq!(status, BilliardStatus::Ok);
    assert!((p - (1.0 - (1.0f64 - t * t).powf(4.5))).abs() < 1e-15);
    let status = unsafe { billiard_normal_component_cdf(1.5, 10, BilliardLaw::Cosine, &mut p) };
    assert_eq!(status, BilliardStatus::InvalidInput);
}

#[test]
fn circle_gap() {
    let b = body(r#"{"type":"ball","dim":2,"radius":1.0}"#);
    let mut gap = 0.0;
    unsafe {
        assert_eq!(billiard_spectral_gap(b, 256, 4, &mut gap), BilliardStatus::Ok);
        billiard_body_free(b);
    }
    assert!((gap - 2.0 / 3.0).abs() < 1e-3, "{gap}");
}

#[test]
fn chain_steps_are_resumable_and_deterministic() {
    let b = body(r#"{"type":"ball","dim":3,"radius":1.0}"#);
    let mut a = ptr::null_mut();
    let mut c = ptr::null_mut();
    let (mut xa, mut xc) = ([0.0; 3], [0.0; 3]);
    unsafe {
        assert_eq!(billiard_chain_new(b, 11, 2, BilliardLaw::Cosine, &mut a), BilliardStatus::Ok);
        assert_eq!(billiard_chain_new(b, 11, 2, BilliardLaw::Cosine, &mut c), BilliardStatus::Ok);
        // The chain owns its body copy.
        billiard_body_free(b);
        for _ in 0..10 {
            assert_eq!(billiard_chain_step(a, 1, xa.as_mut_ptr(), 3), BilliardStatus::Ok);
        }
        assert_eq!(billiard_chain_step(c, 10, xc.as_mut_ptr(), 3), BilliardStatus::Ok);
        assert_eq!(xa, xc);
        let r: f64 = xa.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((r - 1.0).abs() < 1e-9);
        let mut k = 0;
        assert_eq!(billiard_chain_steps_taken(a, &mut k), BilliardStatus::Ok);
        assert_eq!(k, 10);
        // Wrong buffer length leaves the chain untouched.
        assert_eq!(billiard_chain_step(a, 5, xa.as_mut_ptr(), 2), BilliardStatus::InvalidInput);
        assert_eq!(billiard_chain_steps_taken(a, &mut k), BilliardStatus::Ok);
        assert_eq!(k, 10);
        billiard_chain_free(a);
        billiard_chain_free(c);
        billiard_chain_free(ptr::null_mut());
    }
}

#[test]
fn header_is_current() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/billiard.h")).unwrap();
    for name in [
        "billiard_body_from_json",
        "billiard_kernel_density",
        "billiard_chain_step",
        "billiard_spectral_gap",
        "BILLIARD_STATUS_SINGULARITY",
        "typedef struct BilliardBody BilliardBody",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "billiard.h"

int main(void) {
    BilliardBody *body = NULL;
    if (billiard_body_from_json("{\"type\":\"ball\",\"dim\":3,\"radius\":2.0}", &body) != BILLIARD_STATUS_OK) return 1;
    double c = 0, d = 0;
    billiard_body_curvature_bound(body, &c);
    billiard_body_diameter(body, &d);
    if (c != 0.5 || d != 4.0) return 2;
    BilliardChain *chain = NULL;
    if (billiard_chain_new(body, 7, 0, BILLIARD_LAW_COSINE, &chain) != BILLIARD_STATUS_OK) return 3;
    double x[3];
    if (billiard_chain_step(chain, 100, x, 3) != BILLIARD_STATUS_OK) return 4;
    if (fabs(sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) - 2.0) > 1e-9) return 5;
    if (billiard_body_from_json("not json", &body) != BILLIARD_STATUS_INVALID_INPUT) return 6;
    if (billiard_last_error() == NULL) return 7;
    billiard_chain_free(chain);
    printf("ok\n");
    return 0;
}
"#;

/// Compiles a C program against the header and the static library, when a C
/// compiler is available.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libbilliard_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let work = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-c");
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = work.join("main");
    let status = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
