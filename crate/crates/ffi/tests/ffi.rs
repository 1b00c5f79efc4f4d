use std::ffi::{CStr, CString};
use std::ptr;

use recordlab_ffi::*;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn last_error() -> String {
    let p = rl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn density(data: &[f64], dims: &[usize]) -> *mut RlDensity {
    let mut out = ptr::null_mut();
    let s = unsafe { rl_density_new(data.as_ptr(), dims.as_ptr(), dims.len(), &mut out) };
    assert_eq!(s, RlStatus::Ok);
    out
}

// |0><0| ⊗ |+><+| as interleaved row-major
fn zero_plus() -> Vec<f64> {
    let amps = [H, H, 0.0, 0.0];
    let mut m = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            m.extend([amps[i] * amps[j], 0.0]);
        }
    }
    m
}

#[test]
fn density_round_trip_and_partial_trace() {
    let rho = density(&zero_plus(), &[2, 2]);
    assert_eq!(unsafe { rl_density_dim(rho) }, 4);
    let mut back = vec![0.0; 32];
    assert_eq!(unsafe { rl_density_matrix(rho, back.as_mut_ptr(), back.len()) }, RlStatus::Ok);
    for (a, b) in back.iter().zip(zero_plus()) {
        assert!((a - b).abs() < 1e-15);
    }

    let mut a = ptr::null_mut();
    let keep = [1usize];
    assert_eq!(unsafe { rl_partial_trace(rho, keep.as_ptr(), 1, &mut a) }, RlStatus::Ok);
    let mut m = [0.0; 8];
    assert_eq!(unsafe { rl_density_matrix(a, m.as_mut_ptr(), 8) }, RlStatus::Ok);
    for (k, want) in [0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0].iter().enumerate() {
        assert!((m[k] - want).abs() < 1e-12, "{m:?}");
    }

    let mut ip = 0.0;
    assert_eq!(unsafe { rl_hs_inner(a, a, &mut ip) }, RlStatus::Ok);
    assert!((ip - 1.0).abs() < 1e-12);
    unsafe {
        rl_density_free(a);
        rl_density_free(rho);
    }
}

#[test]
fn invalid_inputs_report_status_and_message() {
    // trace 2
    let bad = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let dims = [2usize];
    let mut out = ptr::null_mut();
    let s = unsafe { rl_density_new(bad.as_ptr(), dims.as_ptr(), 1, &mut out) };
    assert_eq!(s, RlStatus::NotPhysical);
    assert!(out.is_null());
    assert!(last_error().contains("trace"));

    let s = unsafe { rl_density_new(ptr::null(), dims.as_ptr(), 1, &mut out) };
    assert_eq!(s, RlStatus::NullPointer);

    let zero = [0usize];
    let s = unsafe { rl_density_new(bad.as_ptr(), zero.as_ptr(), 1, &mut out) };
    assert_eq!(s, RlStatus::InvalidArgument);

    let rho = density(&zero_plus(), &[2, 2]);
    let mut small = [0.0; 4];
    let s = unsafe { rl_density_matrix(rho, small.as_mut_ptr(), small.len()) };
    assert_eq!(s, RlStatus::InvalidArgument);
    let keep = [5usize];
    let s = unsafe { rl_partial_trace(rho, keep.as_ptr(), 1, &mut out) };
    assert_ne!(s, RlStatus::Ok);
    unsafe { rl_density_free(rho) };

    // freeing null is a no-op
    unsafe {
        rl_density_free(ptr::null_mut());
        rl_unitary_free(ptr::null_mut());
        rl_povm_free(ptr::null_mut());
        rl_string_free(ptr::null_mut());
    }
}

#[test]
fn random_objects_are_seeded() {
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(rl_random_density(3, 2, 42, &mut a), RlStatus::Ok);
        assert_eq!(rl_random_density(3, 2, 42, &mut b), RlStatus::Ok);
    }
    let mut ma = [0.0; 18];
    let mut mb = [0.0; 18];
    unsafe {
        rl_density_matrix(a, ma.as_mut_ptr(), 18);
        rl_density_matrix(b, mb.as_mut_ptr(), 18);
    }
    assert_eq!(ma, mb);

    let mut u = ptr::null_mut();
    assert_eq!(unsafe { rl_random_unitary(3, 7, &mut u) }, RlStatus::Ok);
    let mut evolved = ptr::null_mut();
    assert_eq!(unsafe { rl_density_evolve(a, u, &mut evolved) }, RlStatus::Ok);
    let (mut p0, mut p1) = (0.0, 0.0);
    unsafe {
        rl_hs_inner(a, a, &mut p0);
        rl_hs_inner(evolved, evolved, &mut p1);
    }
    assert!((p0 - p1).abs() < 1e-12);

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { rl_random_density(2, 3, 0, &mut bad) }, RlStatus::InvalidArgument);
    unsafe {
        rl_density_free(a);
        rl_density_free(b);
        rl_density_free(evolved);
        rl_unitary_free(u);
    }
}

#[test]
fn purification_reduces_back() {
    let mut rho = ptr::null_mut();
    assert_eq!(unsafe { rl_random_density(2, 2, 3, &mut rho) }, RlStatus::Ok);
    let mut psi = [0.0; 8];
    assert_eq!(unsafe { rl_purify(rho, psi.as_mut_ptr(), 8) }, RlStatus::Ok);
    // build |Γ><Γ| and trace out the purifier
    let amp = |k: usize| (psi[2 * k], psi[2 * k + 1]);
    let mut m = [0.0; 8];
    let mut want = [0.0; 8];
    unsafe { rl_density_matrix(rho, want.as_mut_ptr(), 8) };
    for i in 0..2 {
        for j in 0..2 {
            let (mut re, mut im) = (0.0, 0.0);
            for b in 0..2 {
                let (xr, xi) = amp(i * 2 + b);
                let (yr, yi) = amp(j * 2 + b);
                re += xr * yr + xi * yi;
                im += xi * yr - xr * yi;
            }
            m[2 * (i * 2 + j)] = re;
            m[2 * (i * 2 + j) + 1] = im;
        }
    }
    for (a, b) in m.iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    unsafe { rl_density_free(rho) };
}

#[test]
fn plus_minus_povm() {
    let id = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let dims = [2usize];
    let mut u = ptr::null_mut();
    assert_eq!(unsafe { rl_unitary_new(id.as_ptr(), dims.as_ptr(), 1, &mut u) }, RlStatus::Ok);
    let y = [H, 0.0, H, 0.0, H, 0.0, -H, 0.0];
    let z = id;
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { rl_povm_new(y.as_ptr(), z.as_ptr(), u, &mut m) }, RlStatus::Ok);
    let rho = density(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &[2]);
    let mut p = [0.0; 4];
    assert_eq!(unsafe { rl_povm_probabilities(m, rho, p.as_mut_ptr(), 4) }, RlStatus::Ok);
    for x in p {
        assert!((x - 0.25).abs() < 1e-12);
    }
    let mut r = 1.0;
    assert_eq!(unsafe { rl_povm_identity_residual(m, &mut r) }, RlStatus::Ok);
    assert!(r < 1e-12);

    // non-orthonormal basis
    let bad = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    let mut m2 = ptr::null_mut();
    assert_eq!(unsafe { rl_povm_new(bad.as_ptr(), z.as_ptr(), u, &mut m2) }, RlStatus::InvalidArgument);

    let mut osc = ptr::null_mut();
    assert_eq!(unsafe { rl_povm_oscillator(4, 0.3, &mut osc) }, RlStatus::Ok);
    let mut r = 1.0;
    unsafe { rl_povm_identity_residual(osc, &mut r) };
    assert!(r < 1e-9);
    unsafe {
        rl_povm_free(osc);
        rl_povm_free(m);
        rl_density_free(rho);
        rl_unitary_free(u);
    }
}

#[test]
fn runs_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = CString::new(dir.path().to_str().unwrap()).unwrap();
    let config = CString::new(
        r#"{"kind": "povm", "name": "pm", "seed": 1, "preset": {"type": "plus-minus"}, "rho0": {"diagonal": [1, 0]}}"#,
    )
    .unwrap();
    let mut report = ptr::null_mut();
    let s = unsafe { rl_run_scenario(config.as_ptr(), outdir.as_ptr(), &mut report) };
    assert_eq!(s, RlStatus::Ok);
    let text = unsafe { CStr::from_ptr(report) }.to_str().unwrap().to_owned();
    unsafe { rl_string_free(report) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["passed"], true);
    assert!(dir.path().join("pm/report.json").exists());
    assert!(dir.path().join("pm/probabilities.csv").exists());

    let broken = CString::new(r#"{"kind": "povm", "seed": 1, "rho0": {"diagonal": [1, 0]}, "colour": 3}"#).unwrap();
    let mut report = ptr::null_mut();
    let s = unsafe { rl_run_scenario(broken.as_ptr(), outdir.as_ptr(), &mut report) };
    assert_eq!(s, RlStatus::Config);
    assert!(report.is_null());
    assert!(last_error().contains("colour"));
}

#[test]
fn header_is_generated_and_valid_c() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/recordlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "rl_density_new",
        "rl_partial_trace",
        "rl_povm_probabilities",
        "rl_run_scenario",
        "typedef struct RlDensity RlDensity",
        "RL_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // syntax-check the header when a C compiler is around
    if let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
