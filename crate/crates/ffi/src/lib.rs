//! C ABI over `spikelab`.
//!
//! Objects are opaque handles created by `spk_*_new` and released by the
//! matching `spk_*_free`. Every call returns an `SpkStatus`; on failure the
//! message is kept per thread and read with `spk_last_error`.
//!
//! # Safety
//!
//! Handle arguments must be null or a live pointer returned by the matching
//! constructor, and must not be used after `*_free`. Output pointers must be
//! null or valid for writes. Buffers must hold at least the `len` elements
//! passed alongside them. Strings must be NUL-terminated.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spikelab::geometry::{BoundaryManifold, ManifoldSpec};
use spikelab::pde::{self, DiscreteDomain, NewtonOptions};
use spikelab::profile::{compute_constants, default_profile, GroundStateProfile, MomentReport};
use spikelab::reduction::{self, PeakAnsatz, QuadSpec};
use spikelab::spectrum::{assemble_linearized, kernel_report, HalfBoxGrid};
use spikelab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    NotConverged = 4,
    QuadratureUnstable = 5,
    ChartOverflow = 6,
    DegenerateLandscape = 7,
    MeshTooCoarse = 8,
    LinearSolveFailed = 9,
    Trivial = 10,
    Numerical = 11,
    Panic = 99,
}

impl From<&Error> for SpkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameters(_)
            | Error::Config(_)
            | Error::DimensionMismatch { .. }
            | Error::UnsupportedMoment { .. }
            | Error::OutOfChart { .. } => SpkStatus::InvalidArgument,
            Error::NotConverged(_) | Error::EigenNotConverged(_) | Error::NoBracket(_) | Error::Diverged(_) => {
                SpkStatus::NotConverged
            }
            Error::QuadratureUnstable { .. } => SpkStatus::QuadratureUnstable,
            Error::ChartOverflow { .. } => SpkStatus::ChartOverflow,
            Error::DegenerateLandscape { .. } | Error::DegenerateH(_) => SpkStatus::DegenerateLandscape,
            Error::MeshTooCoarse { .. } => SpkStatus::MeshTooCoarse,
            Error::LinearSolveFailed(_) => SpkStatus::LinearSolveFailed,
            Error::ConvergedToTrivial => SpkStatus::Trivial,
            Error::SingularMetric(_) | Error::Io(_) => SpkStatus::Numerical,
        }
    }
}

/// Ground-state profile V for one (n, p) with its half-space constants.
pub struct SpkProfile {
    profile: GroundStateProfile,
    constants: Option<MomentReport>,
}

/// Boundary of a flat domain (ellipse, disk, spheroid, ball).
pub struct SpkManifold(BoundaryManifold);

/// Planar mesh with stiffness and lumped mass.
pub struct SpkDomain(DiscreteDomain);

/// Summary of a Newton solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpkSolveReport {
    pub converged: bool,
    pub iterations: u32,
    pub residual: f64,
    pub min_u: f64,
    pub peak_value: f64,
    pub foot_x: f64,
    pub foot_y: f64,
    pub foot_param: f64,
    pub energy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard<F: FnOnce() -> Result<(), SpkStatus>>(f: F) -> SpkStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpkStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SpkStatus::Panic
        }
    }
}

fn fail(e: Error) -> SpkStatus {
    let s = SpkStatus::from(&e);
    set_error(e.to_string());
    s
}

fn invalid(msg: &str) -> SpkStatus {
    set_error(msg.to_string());
    SpkStatus::InvalidArgument
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, SpkStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        SpkStatus::NullPointer
    })
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, SpkStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output pointer".into());
        SpkStatus::NullPointer
    })
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
#[no_mangle]
pub unsafe extern "C" fn spk_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Solve the radial ground state for dimension `n` and exponent `p`.
#[no_mangle]
pub unsafe extern "C" fn spk_profile_new(n: u32, p: f64, handle: *mut *mut SpkProfile) -> SpkStatus {
    guard(|| {
        let slot = out(handle)?;
        *slot = ptr::null_mut();
        let profile = default_profile(n as usize, p).map_err(fail)?;
        let constants = if n >= 2 { Some(compute_constants(&profile).map_err(fail)?) } else { None };
        *slot = Box::into_raw(Box::new(SpkProfile { profile, constants }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn spk_profile_free(handle: *mut SpkProfile) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// V(r) and V'(r).
#[no_mangle]
pub unsafe extern "C" fn spk_profile_eval(handle: *const SpkProfile, r: f64, v: *mut f64, dv: *mut f64) -> SpkStatus {
    guard(|| {
        let h = deref(handle)?;
        if !r.is_finite() {
            return Err(invalid("r must be finite"));
        }
        let (a, b) = h.profile.eval(r);
        *out(v)? = a;
        if !dv.is_null() {
            *dv = b;
        }
        Ok(())
    })
}

/// Half-space constants C and α and the Pohozaev residual (n ≥ 2).
#[no_mangle]
pub unsafe extern "C" fn spk_profile_constants(
    handle: *const SpkProfile,
    c: *mut f64,
    alpha: *mut f64,
    pohozaev_residual: *mut f64,
) -> SpkStatus {
    guard(|| {
        let h = deref(handle)?;
        let k = h.constants.as_ref().ok_or_else(|| invalid("constants need n >= 2"))?;
        *out(c)? = k.c;
        *out(alpha)? = k.alpha;
        if !pohozaev_residual.is_null() {
            *pohozaev_residual = k.pohozaev_residual;
        }
        Ok(())
    })
}

/// Build a manifold from a spec such as "ellipse:2,1" or a JSON object.
#[no_mangle]
pub unsafe extern "C" fn spk_manifold_new(spec: *const c_char, handle: *mut *mut SpkManifold) -> SpkStatus {
    guard(|| {
        let slot = out(handle)?;
        *slot = ptr::null_mut();
        if spec.is_null() {
            set_error("null spec".into());
            return Err(SpkStatus::NullPointer);
        }
        let text = CStr::from_ptr(spec).to_str().map_err(|_| invalid("spec is not UTF-8"))?;
        let parsed = if text.trim_start().starts_with('{') {
            serde_json::from_str::<ManifoldSpec>(text).map_err(|e| invalid(&e.to_string()))?
        } else {
            ManifoldSpec::parse(text).map_err(fail)?
        };
        let m = BoundaryManifold::new(parsed).map_err(fail)?;
        *slot = Box::into_raw(Box::new(SpkManifold(m)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn spk_manifold_free(handle: *mut SpkManifold) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Dimension n of the domain (2 or 3).
#[no_mangle]
pub unsafe extern "C" fn spk_manifold_dim(handle: *const SpkManifold, n: *mut u32) -> SpkStatus {
    guard(|| {
        *out(n)? = deref(handle)?.0.n() as u32;
        Ok(())
    })
}

fn point(m: &BoundaryManifold, xi: f64) -> spikelab::geometry::BoundaryPoint {
    if m.n() == 2 {
        m.curve_point(xi)
    } else {
        m.surface_point(0.0, xi)
    }
}

/// Mean curvature H at boundary parameter `xi` (t on curves, polar angle
/// on surfaces).
#[no_mangle]
pub unsafe extern "C" fn spk_mean_curvature(handle: *const SpkManifold, xi: f64, h: *mut f64) -> SpkStatus {
    guard(|| {
        let m = &deref(handle)?.0;
        *out(h)? = m.mean_curvature_at(&point(m, xi));
        Ok(())
    })
}

/// Reduced energy J_ε(W_{ε,ξ}) and its tangential gradient. `grad` must
/// hold n − 1 values.
#[no_mangle]
pub unsafe extern "C" fn spk_reduced_energy(
    manifold: *const SpkManifold,
    profile: *const SpkProfile,
    eps: f64,
    xi: f64,
    r_cut: f64,
    j: *mut f64,
    grad: *mut f64,
    grad_len: usize,
) -> SpkStatus {
    guard(|| {
        let m = &deref(manifold)?.0;
        let prof = &deref(profile)?.profile;
        let s = reduction::reduced_energy(m, prof, eps, &point(m, xi), &QuadSpec::with_cutoff(r_cut)).map_err(fail)?;
        *out(j)? = s.j;
        if !grad.is_null() {
            if grad_len < s.grad_j.len() {
                set_error(format!("gradient needs {} slots", s.grad_j.len()));
                return Err(SpkStatus::BufferTooSmall);
            }
            ptr::copy_nonoverlapping(s.grad_j.as_ptr(), grad, s.grad_j.len());
        }
        Ok(())
    })
}

/// Mesh a planar domain with step `h_mesh`.
#[no_mangle]
pub unsafe extern "C" fn spk_domain_new(manifold: *const SpkManifold, h_mesh: f64, handle: *mut *mut SpkDomain) -> SpkStatus {
    guard(|| {
        let slot = out(handle)?;
        *slot = ptr::null_mut();
        let m = &deref(manifold)?.0;
        let d = pde::discretize(m, h_mesh).map_err(fail)?;
        *slot = Box::into_raw(Box::new(SpkDomain(d)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn spk_domain_free(handle: *mut SpkDomain) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

#[no_mangle]
pub unsafe extern "C" fn spk_domain_node_count(handle: *const SpkDomain, count: *mut usize) -> SpkStatus {
    guard(|| {
        *out(count)? = deref(handle)?.0.len();
        Ok(())
    })
}

/// Node coordinates as interleaved (x, y) pairs; `xy` must hold 2 × nodes.
#[no_mangle]
pub unsafe extern "C" fn spk_domain_nodes(handle: *const SpkDomain, xy: *mut f64, len: usize) -> SpkStatus {
    guard(|| {
        let d = &deref(handle)?.0;
        if xy.is_null() {
            set_error("null buffer".into());
            return Err(SpkStatus::NullPointer);
        }
        if len < 2 * d.len() {
            set_error(format!("buffer needs {} values", 2 * d.len()));
            return Err(SpkStatus::BufferTooSmall);
        }
        for (k, p) in d.nodes.iter().enumerate() {
            *xy.add(2 * k) = p[0];
            *xy.add(2 * k + 1) = p[1];
        }
        Ok(())
    })
}

/// Newton solve at `eps` seeded with the peak ansatz at boundary parameter
/// `xi`. When `u` is non-null it receives the nodal solution (`len` ≥
/// nodes).
#[no_mangle]
pub unsafe extern "C" fn spk_solve(
    domain: *const SpkDomain,
    profile: *const SpkProfile,
    eps: f64,
    xi: f64,
    r_cut: f64,
    report: *mut SpkSolveReport,
    u: *mut f64,
    len: usize,
) -> SpkStatus {
    guard(|| {
        let d = &deref(domain)?.0;
        let prof = &deref(profile)?.profile;
        let rep_out = out(report)?;
        if !u.is_null() && len < d.len() {
            set_error(format!("solution buffer needs {} values", d.len()));
            return Err(SpkStatus::BufferTooSmall);
        }
        let m = &d.manifold;
        let a = PeakAnsatz::new(m, prof, eps, m.curve_point(xi), r_cut).map_err(fail)?;
        let u0 = d.sample_ansatz(&a);
        let (sol, rep) = pde::newton_solve(d, eps, prof.p, &u0, NewtonOptions::default()).map_err(fail)?;
        *rep_out = SpkSolveReport {
            converged: rep.converged,
            iterations: rep.iterations as u32,
            residual: rep.residual,
            min_u: rep.min_u,
            peak_value: rep.peak_value,
            foot_x: rep.foot_point[0],
            foot_y: rep.foot_point[1],
            foot_param: rep.foot_param,
            energy: rep.energy,
        };
        if !u.is_null() {
            ptr::copy_nonoverlapping(sol.as_ptr(), u, sol.len());
        }
        Ok(())
    })
}

/// Lowest `count` eigenvalues of the linearized operator on the half box
/// [−L, L]^{n−1} × [0, L] with step h, plus the gap above the near-kernel
/// cluster.
#[no_mangle]
pub unsafe extern "C" fn spk_spectrum(
    profile: *const SpkProfile,
    l: f64,
    h: f64,
    eigenvalues: *mut f64,
    count: usize,
    gap: *mut f64,
) -> SpkStatus {
    guard(|| {
        let prof = &deref(profile)?.profile;
        if eigenvalues.is_null() {
            set_error("null buffer".into());
            return Err(SpkStatus::NullPointer);
        }
        let grid = HalfBoxGrid::new(prof.n, l, h).map_err(fail)?;
        let op = assemble_linearized(prof, &grid).map_err(fail)?;
        let rep = kernel_report(&op, count.max(prof.n + 1)).map_err(fail)?;
        let k = count.min(rep.eigenvalues.len());
        ptr::copy_nonoverlapping(rep.eigenvalues.as_ptr(), eigenvalues, k);
        if !gap.is_null() {
            *gap = rep.gap;
        }
        Ok(())
    })
}

/// Run the command-line driver with C-style arguments (argv[0] is the
/// program name). Returns the process exit code.
#[no_mangle]
pub unsafe extern "C" fn spk_run_cli(argc: c_int, argv: *const *const c_char) -> c_int {
    let res = catch_unwind(|| {
        let mut args = Vec::new();
        for k in 0..argc.max(0) as usize {
            let a = *argv.add(k);
            if a.is_null() {
                return 2;
            }
            args.push(CStr::from_ptr(a).to_string_lossy().into_owned());
        }
        spikelab::cli::run(args)
    });
    res.unwrap_or(70)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(SpkStatus::from(&Error::ConvergedToTrivial), SpkStatus::Trivial);
        assert_eq!(SpkStatus::from(&Error::MeshTooCoarse { nodes_per_radius: 3.0 }), SpkStatus::MeshTooCoarse);
        assert_eq!(SpkStatus::from(&Error::Diverged("x".into())), SpkStatus::NotConverged);
        assert_eq!(SpkStatus::Panic as i32, 99);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, SpkStatus::Panic);
        let msg = LAST_ERROR.with(|e| e.borrow().clone());
        assert_eq!(msg, "panic: boom");
        assert_eq!(guard(|| Ok(())), SpkStatus::Ok);
        assert!(LAST_ERROR.with(|e| e.borrow().is_empty()));
    }

    #[test]
    fn error_buffer_truncates() {
        set_error("abcdef".into());
        let mut buf = [1 as c_char; 4];
        let n = unsafe { spk_last_error(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(n, 6);
        assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "abc");
        assert_eq!(unsafe { spk_last_error(ptr::null_mut(), 0) }, 6);
    }
}
