use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hablab_ffi::*;

const FIG1D: &str =
    "dim = 1\nomega = [-10.0, 10.0]\nb = [[-6.0, 6.0]]\nd = 10.0\nm_default = 1.0\n";

fn landscape(text: &str) -> *mut HablabLandscape {
    let text = CString::new(text).unwrap();
    let mut l = ptr::null_mut();
    assert_eq!(
        unsafe { hablab_landscape_from_toml(text.as_ptr(), &mut l) },
        HablabStatus::Ok
    );
    l
}

fn grid(l: *const HablabLandscape, n: usize) -> *mut HablabGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { hablab_grid_new(l, n, &mut g) }, HablabStatus::Ok);
    g
}

fn last_error() -> String {
    let p = hablab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn destruction_eigenvalue_through_handles() {
    let l = landscape(FIG1D);
    let g = grid(l, 2001);
    let n = unsafe { hablab_grid_len(g) };
    assert_eq!(n, 2001);
    let mut phi = vec![0.0; n];
    let mut mu = 0.0;
    let s = unsafe { hablab_mu(g, 10.0, f64::INFINITY, &mut mu, phi.as_mut_ptr(), n) };
    assert_eq!(s, HablabStatus::Ok);
    let exact = 10.0 * (std::f64::consts::PI / 8.0).powi(2) - 1.0;
    assert!((mu - exact).abs() < 1e-5, "{mu} vs {exact}");
    assert!(phi.iter().all(|v| *v >= 0.0));
    assert!(hablab_last_error().is_null());

    let mut coords = vec![0.0; n];
    assert_eq!(
        unsafe { hablab_grid_coords(g, coords.as_mut_ptr(), n) },
        HablabStatus::Ok
    );
    assert_eq!((coords[0], coords[n - 1]), (-10.0, 10.0));
    unsafe {
        hablab_grid_free(g);
        hablab_landscape_free(l);
    }
}

#[test]
fn threshold_and_landscape_measures() {
    let l = landscape(FIG1D);
    let (mut cs, mut frac) = (0.0, 0.0);
    unsafe {
        assert_eq!(hablab_landscape_c_star(l, &mut cs), HablabStatus::Ok);
        assert_eq!(
            hablab_landscape_fraction_removed(l, &mut frac),
            HablabStatus::Ok
        );
    }
    assert!((cs - 2.0 / 3.0).abs() < 1e-12);
    assert!((frac - 0.6).abs() < 1e-12);

    let g = grid(l, 1001);
    let mut th = HablabThreshold {
        exists: false,
        c0: 0.0,
        mu_infinity: 0.0,
        c_star: 0.0,
        iterations: 0,
    };
    assert_eq!(
        unsafe { hablab_threshold(g, 10.0, &mut th) },
        HablabStatus::Ok
    );
    assert!(th.exists);
    assert!((th.c0 - 10.03).abs() < 0.05, "{}", th.c0);
    assert!(th.c0 > th.c_star);

    assert_eq!(
        unsafe { hablab_threshold(g, 1.0, &mut th) },
        HablabStatus::Ok
    );
    assert!(!th.exists);
    assert!(th.c0.is_nan());
    unsafe {
        hablab_grid_free(g);
        hablab_landscape_free(l);
    }
}

#[test]
fn lambda_and_steady_state() {
    let l = landscape(FIG1D);
    let g = grid(l, 401);
    let n = unsafe { hablab_grid_len(g) };
    let mut lambda = 0.0;
    assert_eq!(
        unsafe { hablab_lambda(g, 0.5, &mut lambda, ptr::null_mut(), 0) },
        HablabStatus::Precondition
    );
    assert!(last_error().contains("negative integral"));
    assert_eq!(
        unsafe { hablab_lambda(g, f64::INFINITY, &mut lambda, ptr::null_mut(), 0) },
        HablabStatus::Ok
    );
    assert!(lambda > 0.0);

    let mut u = vec![0.0; n];
    let mut persistent = -1;
    let s = unsafe { hablab_steady_state(g, 1.0, 10.0, &mut persistent, u.as_mut_ptr(), n) };
    assert_eq!(s, HablabStatus::Ok);
    assert_eq!(persistent, 1);
    assert!(u.iter().all(|v| (0.0..=1.0 + 1e-8).contains(v)));

    let s = unsafe { hablab_steady_state(g, 1.0, 10.0, &mut persistent, u.as_mut_ptr(), n - 1) };
    assert_eq!(s, HablabStatus::BufferTooSmall);
    unsafe {
        hablab_grid_free(g);
        hablab_landscape_free(l);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let bad = CString::new("dim = 3").unwrap();
    let mut l = ptr::null_mut();
    assert_eq!(
        unsafe { hablab_landscape_from_toml(bad.as_ptr(), &mut l) },
        HablabStatus::Parse
    );
    assert!(l.is_null());
    assert!(!last_error().is_empty());

    let inverted = CString::new(FIG1D.replace("[[-6.0, 6.0]]", "[[-6.0, 12.0]]")).unwrap();
    assert_eq!(
        unsafe { hablab_landscape_from_toml(inverted.as_ptr(), &mut l) },
        HablabStatus::Geometry
    );

    assert_eq!(
        unsafe { hablab_landscape_from_toml(ptr::null(), &mut l) },
        HablabStatus::NullPointer
    );
    let mut mu = 0.0;
    assert_eq!(
        unsafe { hablab_mu(ptr::null(), 1.0, 1.0, &mut mu, ptr::null_mut(), 0) },
        HablabStatus::NullPointer
    );
    assert_eq!(unsafe { hablab_grid_len(ptr::null()) }, 0);
    unsafe {
        hablab_grid_free(ptr::null_mut());
        hablab_landscape_free(ptr::null_mut());
    }

    let l = landscape(FIG1D);
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { hablab_grid_new(l, 3, &mut g) },
        HablabStatus::InvalidParameter
    );
    unsafe { hablab_landscape_free(l) };
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(hablab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/hablab.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 12);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
}

fn static_library() -> Option<PathBuf> {
    // integration test binaries live in <target>/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent()?.to_path_buf();
    let candidates = [
        deps.join("libhablab_ffi.a"),
        deps.parent()?.join("libhablab_ffi.a"),
    ];
    candidates.into_iter().find(|p| p.exists())
}

#[test]
fn c_program_links_against_static_library() {
    let Some(lib) = static_library() else {
        eprintln!("skipping: static library not built");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new("cc")
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let line = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields[0], "401");
    let mu: f64 = fields[1].parse().unwrap();
    assert!((mu - (10.0 * (std::f64::consts::PI / 8.0).powi(2) - 1.0)).abs() < 1e-3);
    assert_eq!(fields[2], "1");
    assert_eq!(
        fields[4],
        (HablabStatus::InvalidParameter as i32).to_string()
    );
}
