use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use spikelab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    unsafe {
        spk_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn manifold(spec: &str) -> *mut SpkManifold {
    let s = CString::new(spec).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { spk_manifold_new(s.as_ptr(), &mut m) }, SpkStatus::Ok, "{}", last_error());
    m
}

#[test]
fn profile_and_constants() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(spk_profile_new(2, 4.0, &mut p), SpkStatus::Ok);
        let (mut c, mut a, mut r) = (0.0, 0.0, 1.0);
        assert_eq!(spk_profile_constants(p, &mut c, &mut a, &mut r), SpkStatus::Ok);
        assert!((c - 2.925224131137).abs() < 1e-9);
        assert!((a - 1.395995967448).abs() < 1e-9);
        assert!(r < 1e-6);
        let (mut v, mut dv) = (0.0, 1.0);
        assert_eq!(spk_profile_eval(p, 0.0, &mut v, &mut dv), SpkStatus::Ok);
        assert!((v - 2.2062008646).abs() < 1e-8 && dv == 0.0);
        spk_profile_free(p);

        let mut q = ptr::null_mut();
        assert_eq!(spk_profile_new(1, 4.0, &mut q), SpkStatus::Ok);
        assert_eq!(spk_profile_constants(q, &mut c, &mut a, ptr::null_mut()), SpkStatus::InvalidArgument);
        assert!(last_error().contains("n >= 2"));
        spk_profile_free(q);
    }
}

#[test]
fn errors_and_null_handles() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(spk_profile_new(2, 1.5, &mut p), SpkStatus::InvalidArgument);
        assert!(p.is_null());
        assert!(!last_error().is_empty());
        let mut h = 0.0;
        assert_eq!(spk_mean_curvature(ptr::null(), 0.0, &mut h), SpkStatus::NullPointer);
        assert_eq!(spk_profile_new(2, 4.0, ptr::null_mut()), SpkStatus::NullPointer);
        let bad = CString::new("torus:1").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(spk_manifold_new(bad.as_ptr(), &mut m), SpkStatus::InvalidArgument);
        assert!(last_error().contains("torus"));
        spk_profile_free(ptr::null_mut());
        spk_manifold_free(ptr::null_mut());
        spk_domain_free(ptr::null_mut());
        let v = CStr::from_ptr(spk_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn geometry_and_reduced_energy() {
    let m = manifold("ellipse:2,1");
    let disk = manifold(r#"{"kind":"disk","radius":1}"#);
    unsafe {
        let (mut h, mut n) = (0.0, 0u32);
        assert_eq!(spk_mean_curvature(m, 0.0, &mut h), SpkStatus::Ok);
        assert!((h - 2.0).abs() < 1e-12);
        assert_eq!(spk_manifold_dim(m, &mut n), SpkStatus::Ok);
        assert_eq!(n, 2);
        let mut p = ptr::null_mut();
        assert_eq!(spk_profile_new(2, 4.0, &mut p), SpkStatus::Ok);
        let (mut j, mut g) = (0.0, [0.0f64; 1]);
        assert_eq!(spk_reduced_energy(m, p, 0.02, 0.7, 0.2, &mut j, g.as_mut_ptr(), 1), SpkStatus::Ok);
        assert!(j > 2.7 && j < 2.93 && g[0] != 0.0);
        assert_eq!(spk_reduced_energy(m, p, 0.02, 0.7, 0.2, &mut j, g.as_mut_ptr(), 0), SpkStatus::BufferTooSmall);
        assert_eq!(spk_reduced_energy(m, p, 0.01, 0.0, 0.6, &mut j, ptr::null_mut(), 0), SpkStatus::ChartOverflow);
        let mut d = ptr::null_mut();
        assert_eq!(spk_domain_new(disk, 0.05, &mut d), SpkStatus::MeshTooCoarse);
        assert!(d.is_null());
        spk_profile_free(p);
    }
    unsafe {
        spk_manifold_free(m);
        spk_manifold_free(disk);
    }
}

#[test]
fn newton_solve_on_disk() {
    let m = manifold("disk:1");
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(spk_profile_new(2, 4.0, &mut p), SpkStatus::Ok);
        let mut d = ptr::null_mut();
        assert_eq!(spk_domain_new(m, 0.025, &mut d), SpkStatus::Ok);
        let mut nodes = 0usize;
        assert_eq!(spk_domain_node_count(d, &mut nodes), SpkStatus::Ok);
        let mut xy = vec![0.0; 2 * nodes];
        assert_eq!(spk_domain_nodes(d, xy.as_mut_ptr(), xy.len()), SpkStatus::Ok);
        assert_eq!(spk_domain_nodes(d, xy.as_mut_ptr(), 3), SpkStatus::BufferTooSmall);
        assert!(xy.chunks(2).all(|q| q[0] * q[0] + q[1] * q[1] <= 1.0 + 1e-12));
        let mut rep = SpkSolveReport::default();
        let mut u = vec![0.0; nodes];
        assert_eq!(spk_solve(d, p, 0.1, 0.0, 0.8, &mut rep, u.as_mut_ptr(), nodes), SpkStatus::Ok, "{}", last_error());
        assert!(rep.converged && rep.min_u > 0.0);
        assert!(((rep.foot_x - 1.0).powi(2) + rep.foot_y.powi(2)).sqrt() < 0.1);
        let umax = u.iter().copied().fold(0.0, f64::max);
        assert_eq!(umax, rep.peak_value);
        spk_domain_free(d);
        spk_profile_free(p);
        spk_manifold_free(m);
    }
}

#[test]
fn spectrum_kernel() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(spk_profile_new(2, 4.0, &mut p), SpkStatus::Ok);
        let mut ev = [0.0; 3];
        let mut gap = 0.0;
        assert_eq!(spk_spectrum(p, 12.0, 0.2, ev.as_mut_ptr(), 3, &mut gap), SpkStatus::Ok, "{}", last_error());
        assert!(ev[0] < 0.0 && ev[0].abs() < 0.1, "{ev:?}");
        assert!(gap > 0.5);
        assert_eq!(spk_spectrum(p, 11.0, 0.2, ev.as_mut_ptr(), 3, &mut gap), SpkStatus::InvalidArgument);
        spk_profile_free(p);
    }
}

#[test]
fn cli_entry_point() {
    let args: Vec<CString> = ["spikelab", "no-such-command"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<*const std::ffi::c_char> = args.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(unsafe { spk_run_cli(ptrs.len() as i32, ptrs.as_ptr()) }, 2);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/spikelab.h")).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for f in exports {
        assert!(header.contains(&format!(" {f}(")) || header.contains(&format!("*{f}(")), "{f} missing from header");
    }
    assert!(header.contains("SPK_STATUS_OK = 0"));
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libspikelab_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("spikelab_smoke");
    let status = Command::new(&cc)
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("C=2.925224131") && text.contains("H=2.000000"), "{text}");
}
