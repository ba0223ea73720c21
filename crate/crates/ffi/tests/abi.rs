use std::ffi::{c_char, CStr, CString};
use std::ptr;

use elliptic_lab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe { el_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn diagonal_matrix_round_trip() {
    let re = [2.0, 0.0, 0.0, -1.0];
    let im = [0.0, 0.0, 0.0, 3.0];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(el_matrix_from_parts(2, re.as_ptr(), im.as_ptr(), &mut m), ElStatus::Ok);
        let mut n = 0;
        assert_eq!(el_matrix_order(m, &mut n), ElStatus::Ok);
        assert_eq!(n, 2);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(el_matrix_get(m, 1, 1, &mut a, &mut b), ElStatus::Ok);
        assert_eq!((a, b), (-1.0, 3.0));
        assert_eq!(el_matrix_get(m, 2, 0, &mut a, &mut b), ElStatus::InvalidArgument);

        let (mut er, mut ei) = ([0.0; 2], [0.0; 2]);
        assert_eq!(el_eigenvalues(m, 1.0, er.as_mut_ptr(), ei.as_mut_ptr(), 2), ElStatus::Ok);
        let mut eigs: Vec<(f64, f64)> = er.iter().copied().zip(ei).collect();
        eigs.sort_by(|x, y| x.0.total_cmp(&y.0));
        assert!((eigs[0].0 + 1.0).abs() < 1e-12 && (eigs[0].1 - 3.0).abs() < 1e-12);
        assert!((eigs[1].0 - 2.0).abs() < 1e-12 && eigs[1].1.abs() < 1e-12);

        let mut sv = [0.0; 2];
        assert_eq!(el_singular_values(m, 1.0, sv.as_mut_ptr(), 2), ElStatus::Ok);
        assert!((sv[0] - 10f64.sqrt()).abs() < 1e-12 && (sv[1] - 2.0).abs() < 1e-12);
        assert_eq!(el_singular_values(m, 1.0, sv.as_mut_ptr(), 1), ElStatus::BufferTooSmall);
        el_matrix_free(m);
    }
}

#[test]
fn generated_matrix_is_deterministic() {
    let spec = CString::new(r#"{"n": 6, "pair": {"kind": "discrete_mix", "rho": 0.5}, "seed": 11}"#).unwrap();
    let entries = |trial| unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(el_matrix_generate(spec.as_ptr(), trial, &mut m), ElStatus::Ok);
        let mut v = Vec::new();
        for i in 0..6 {
            for j in 0..6 {
                let (mut a, mut b) = (0.0, 0.0);
                el_matrix_get(m, i, j, &mut a, &mut b);
                v.push((a, b));
            }
        }
        el_matrix_free(m);
        v
    };
    assert_eq!(entries(0), entries(0));
    assert_ne!(entries(0), entries(1));
}

#[test]
fn errors_carry_messages() {
    let mut m = ptr::null_mut();
    let bad = CString::new(r#"{"n": 4}"#).unwrap();
    unsafe {
        assert_eq!(el_matrix_generate(bad.as_ptr(), 0, &mut m), ElStatus::InvalidArgument);
        assert!(m.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(el_matrix_generate(ptr::null(), 0, &mut m), ElStatus::NullPointer);
        assert!(last_error().contains("spec_json"));
        let mut n = 0;
        assert_eq!(el_matrix_order(ptr::null(), &mut n), ElStatus::NullPointer);
        el_matrix_free(ptr::null_mut());
    }
}

#[test]
fn small_ball_and_solver() {
    let q = CString::new(r#"{"a": [[1,0],[1,0],[1,0],[1,0]], "atom": {"scalar": {"kind": "bernoulli"}}, "beta": 0.5}"#)
        .unwrap();
    let (mut g, mut exact) = (0.0, 0);
    unsafe {
        assert_eq!(el_small_ball_exact(q.as_ptr(), &mut g, &mut exact), ElStatus::Ok);
    }
    assert_eq!((g, exact), (6.0 / 16.0, 1));

    let gq = CString::new(r#"{"a": [[1,0]], "atom": {"scalar": {"kind": "gaussian_real"}}, "beta": 0.5}"#).unwrap();
    unsafe {
        assert_eq!(el_small_ball_exact(gq.as_ptr(), &mut g, &mut exact), ElStatus::Unsupported);
    }

    // a Stieltjes transform maps the upper half-plane to itself
    let mut out = [0.0; 6];
    unsafe {
        assert_eq!(el_solve_stu(0.0, 0.0, 0.0, 0.0, 1.0, out.as_mut_ptr(), 6), ElStatus::Ok);
        assert_eq!(el_solve_stu(0.0, 0.0, 0.0, 0.0, 1.0, out.as_mut_ptr(), 5), ElStatus::BufferTooSmall);
    }
    assert!(out[1] > 0.0);
}

#[test]
fn inside_fraction_counts_points() {
    let re = [0.0, 1.4, 0.0];
    let im = [0.0, 0.0, 1.4];
    let mut f = 0.0;
    unsafe {
        assert_eq!(el_inside_fraction(re.as_ptr(), im.as_ptr(), 3, 0.5, 1.0, &mut f), ElStatus::Ok);
    }
    assert!((f - 2.0 / 3.0).abs() < 1e-15);
    unsafe {
        assert_eq!(el_inside_fraction(re.as_ptr(), im.as_ptr(), 3, 1.5, 1.0, &mut f), ElStatus::InvalidArgument);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/elliptic_lab.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() >= 10);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct ElMatrix ElMatrix;"));
    let v = unsafe { CStr::from_ptr(el_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles and runs examples/smoke.c against the static library when a C
/// compiler is on PATH.
#[test]
fn c_program_links_against_header() {
    let Ok(exe) = std::env::current_exe() else { return };
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join("libelliptic_lab_ffi.a");
    if !lib.exists() || std::process::Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let root = env!("CARGO_MANIFEST_DIR");
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = std::process::Command::new("cc")
        .args([&format!("{root}/examples/smoke.c"), "-I", &format!("{root}/include"), "-o"])
        .arg(&bin)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = std::process::Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("elliptic-lab "));
}
