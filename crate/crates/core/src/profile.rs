//! Radial ground state of -ΔV + V = V^{p-1} on R^n and the half-space
//! constants built from it.
//!
//! V(0) is found by bisection on the shooting parameter. Past the radius
//! where the two bracketing trajectories separate, the profile is rebuilt
//! from the logarithmic derivative w = V'/V, integrated backwards from far
//! out where w ≈ -1 - (n-1)/(2r); that direction is stable, so the decaying
//! branch is recovered without the exponential blow-up of forward shooting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, map_rule, rk4_step, simpson};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub n: usize,
    pub p: f64,
}

impl Parameters {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("n must be at least 1".into()));
        }
        if !(p > 2.0) || !p.is_finite() {
            return Err(Error::InvalidParameters(format!("p = {p} must exceed 2")));
        }
        if n >= 3 {
            let crit = 2.0 * n as f64 / (n as f64 - 2.0);
            if p >= crit {
                return Err(Error::InvalidParameters(format!(
                    "p = {p} is not subcritical for n = {n} (needs p < {crit})"
                )));
            }
        }
        Ok(Parameters { n, p })
    }

    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// (u⁺)^q, the positive-part power used throughout.
#[inline]
pub fn pos_pow(u: f64, q: f64) -> f64 {
    if u > 0.0 {
        u.powf(q)
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateProfile {
    pub n: usize,
    pub p: f64,
    pub h: f64,
    pub r_grid: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub decay_c: f64,
    pub r_max: f64,
    /// Radius where the shot trajectory hands over to the backward tail.
    pub r_match: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome {
    Over,
    Under,
    Undecided,
}

struct Shot {
    v: Vec<f64>,
    dv: Vec<f64>,
    outcome: Outcome,
}

fn radial_rhs(n: usize, p: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let m = (n - 1) as f64;
    move |r: f64, y: &[f64; 2]| {
        let damp = if r > 0.0 { m / r * y[1] } else { 0.0 };
        [y[1], -damp + y[0] - pos_pow(y[0], p - 1.0)]
    }
}

/// Integrate from the origin with V(0) = a. Samples are stored up to
/// `n_store` nodes; integration continues (unstored) up to `r_cap` until the
/// trajectory is classified.
fn shoot(a: f64, n: usize, p: f64, h: f64, n_store: usize, r_cap: f64) -> Shot {
    let nf = n as f64;
    let b = (a - a.powf(p - 1.0)) / (2.0 * nf);
    let c = b * (1.0 - (p - 1.0) * a.powf(p - 2.0)) / (4.0 * (nf + 2.0));
    let f = radial_rhs(n, p);
    let mut v = vec![a];
    let mut dv = vec![0.0];
    let mut y = [a + b * h * h + c * h.powi(4), 2.0 * b * h + 4.0 * c * h.powi(3)];
    let mut k = 1usize;
    let outcome = loop {
        if y[0] < 0.0 {
            break Outcome::Over;
        }
        if y[1] > 0.0 {
            break Outcome::Under;
        }
        if k < n_store {
            v.push(y[0]);
            dv.push(y[1]);
        }
        let r = k as f64 * h;
        if r >= r_cap {
            break Outcome::Undecided;
        }
        y = rk4_step(&f, r, y, h);
        k += 1;
    };
    Shot { v, dv, outcome }
}

/// Backward integration of (w, ℓ) with w' = 1 - V^{p-2} - (n-1)w/r - w²,
/// ℓ' = w, from `r_far` down to `r_lo` on the grid of step h. `lnv` gives
/// the current estimate of ln V used in the coupling term. Returns w and ℓ
/// at grid nodes r_lo + k h.
fn backward_tail<F: Fn(f64) -> f64>(
    n: usize,
    p: f64,
    h: f64,
    r_lo: f64,
    steps: usize,
    lnv: F,
) -> (Vec<f64>, Vec<f64>) {
    let m = (n - 1) as f64;
    let f = |r: f64, y: &[f64; 2]| {
        let coupling = ((p - 2.0) * lnv(r)).exp();
        [1.0 - coupling - m * y[0] / r - y[0] * y[0], y[0]]
    };
    let r_far = r_lo + steps as f64 * h;
    let mut y = [-1.0 - m / (2.0 * r_far), 0.0];
    let mut w = vec![0.0; steps + 1];
    let mut l = vec![0.0; steps + 1];
    w[steps] = y[0];
    l[steps] = y[1];
    for k in (0..steps).rev() {
        let r = r_lo + (k + 1) as f64 * h;
        y = rk4_step(&f, r, y, -h);
        w[k] = y[0];
        l[k] = y[1];
    }
    (w, l)
}

pub fn solve_ground_state(params: Parameters, r_max: f64, grid_step: f64, shoot_tol: f64) -> Result<GroundStateProfile> {
    let Parameters { n, p } = params;
    Parameters::new(n, p)?;
    if !(r_max >= 20.0) {
        return Err(Error::InvalidParameters(format!("r_max = {r_max} must be at least 20")));
    }
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::InvalidParameters(format!("grid_step = {grid_step} must lie in (0, 0.01]")));
    }
    let mut r_max = r_max;
    for _ in 0..3 {
        let prof = solve_once(n, p, r_max, grid_step)?;
        if tail_deviation(&prof) < 0.01 {
            if prof.max_residual > shoot_tol {
                return Err(Error::NotConverged(format!(
                    "ODE residual {:.3e} above tolerance {:.3e}",
                    prof.max_residual, shoot_tol
                )));
            }
            return Ok(prof);
        }
        r_max += 10.0;
    }
    Err(Error::NotConverged("tail plateau not reached".into()))
}

fn solve_once(n: usize, p: f64, r_max: f64, h: f64) -> Result<GroundStateProfile> {
    let n_nodes = (r_max / h).round() as usize + 1;
    let r_max = (n_nodes - 1) as f64 * h;
    let r_cap = 3.0 * r_max + 60.0;

    // a = 1 is the constant solution; it sits on the undershoot side.
    let mut lo = 1.0;
    let mut hi = 2.0;
    loop {
        match shoot(hi, n, p, h, 0, r_cap).outcome {
            Outcome::Over => break,
            Outcome::Under => {
                lo = hi;
                hi *= 2.0;
            }
            Outcome::Undecided => break,
        }
        if hi > 1e6 {
            return Err(Error::NoBracket(hi));
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, n, p, h, 0, r_cap).outcome {
            Outcome::Over => hi = mid,
            Outcome::Under => lo = mid,
            Outcome::Undecided => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }
    let s_lo = shoot(lo, n, p, h, n_nodes, r_cap);
    let s_hi = shoot(hi, n, p, h, n_nodes, r_cap);

    let avail = s_lo.v.len().min(s_hi.v.len());
    let mut k_m = avail - 1;
    for k in 1..avail {
        let scale = s_lo.v[k].abs().max(f64::MIN_POSITIVE);
        if (s_hi.v[k] - s_lo.v[k]).abs() > 1e-8 * scale || s_lo.v[k] < 1e-300 {
            k_m = k.saturating_sub(1);
            break;
        }
    }
    // Keep the handover away from the core so the tail equation is clean.
    let k_m = k_m.min(n_nodes - 1).max((5.0 / h) as usize).min(avail - 1);
    let mut v = vec![0.0; n_nodes];
    let mut dv = vec![0.0; n_nodes];
    for k in 0..=k_m {
        v[k] = 0.5 * (s_lo.v[k] + s_hi.v[k]);
        dv[k] = 0.5 * (s_lo.dv[k] + s_hi.dv[k]);
    }
    let r_m = k_m as f64 * h;
    let v_m = v[k_m];
    if k_m + 1 < n_nodes {
        let steps = (n_nodes - 1 - k_m) + (10.0 / h).round() as usize;
        let m = (n - 1) as f64 / 2.0;
        let ln_vm = v_m.ln();
        let mut lnv_nodes: Vec<f64> = (0..=steps)
            .map(|k| {
                let r = r_m + k as f64 * h;
                ln_vm - (r - r_m) - m * (r / r_m).ln()
            })
            .collect();
        let mut w = Vec::new();
        for _ in 0..4 {
            let nodes = lnv_nodes.clone();
            let lnv = |r: f64| {
                let x = ((r - r_m) / h).clamp(0.0, steps as f64);
                let k = (x.floor() as usize).min(steps - 1);
                let t = x - k as f64;
                (1.0 - t) * nodes[k] + t * nodes[k + 1]
            };
            let (wk, lk) = backward_tail(n, p, h, r_m, steps, lnv);
            for k in 0..=steps {
                lnv_nodes[k] = ln_vm + lk[k] - lk[0];
            }
            w = wk;
        }
        for k in (k_m + 1)..n_nodes {
            let j = k - k_m;
            v[k] = lnv_nodes[j].exp();
            dv[k] = w[j] * v[k];
        }
    }
    let r_grid: Vec<f64> = (0..n_nodes).map(|k| k as f64 * h).collect();
    let m = (n - 1) as f64 / 2.0;
    let decay_c = v[n_nodes - 1] * r_max.powf(m) * r_max.exp();
    let mut prof = GroundStateProfile {
        n,
        p,
        h,
        r_grid,
        v,
        dv,
        decay_c,
        r_max,
        r_match: r_m,
        max_residual: 0.0,
    };
    prof.max_residual = ode_residual(&prof).iter().fold(0.0, |a: f64, &b| a.max(b.abs()));
    Ok(prof)
}

/// Pointwise residual V'' + (n-1)/r V' - V + V^{p-1} at every grid node,
/// with V'' from fourth-order differences of the stored V'.
pub fn ode_residual(prof: &GroundStateProfile) -> Vec<f64> {
    let n = prof.n as f64;
    let h = prof.h;
    let m = prof.dv.len();
    let dv = |k: isize| -> f64 {
        if k < 0 {
            -prof.dv[(-k) as usize]
        } else {
            prof.dv[k as usize]
        }
    };
    let mut out = vec![0.0; m];
    for k in 0..m {
        let ki = k as isize;
        let d2 = if k + 2 < m {
            (-dv(ki + 2) + 8.0 * dv(ki + 1) - 8.0 * dv(ki - 1) + dv(ki - 2)) / (12.0 * h)
        } else {
            (3.0 * dv(ki) - 4.0 * dv(ki - 1) + dv(ki - 2)) / (2.0 * h)
        };
        let lap = if k == 0 { n * d2 } else { d2 + (n - 1.0) / prof.r_grid[k] * prof.dv[k] };
        out[k] = lap - prof.v[k] + pos_pow(prof.v[k], prof.p - 1.0);
    }
    out
}

/// max over r in [0.9 r_max, r_max] of |V r^{(n-1)/2} e^r / c - 1|.
pub fn tail_deviation(prof: &GroundStateProfile) -> f64 {
    let m = (prof.n - 1) as f64 / 2.0;
    let start = 0.9 * prof.r_max;
    prof.r_grid
        .iter()
        .zip(&prof.v)
        .filter(|(r, _)| **r >= start)
        .map(|(r, v)| (v * r.powf(m) * r.exp() / prof.decay_c - 1.0).abs())
        .fold(0.0, f64::max)
}

impl GroundStateProfile {
    pub fn params(&self) -> Parameters {
        Parameters { n: self.n, p: self.p }
    }

    pub fn v0(&self) -> f64 {
        self.v[0]
    }

    /// (V, V') at radius r.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        eval_profile(self, r)
    }

    /// V'' from the equation itself.
    pub fn eval_d2(&self, r: f64) -> f64 {
        let (v, dv) = self.eval(r);
        let rhs = v - pos_pow(v, self.p - 1.0);
        if r < 1e-12 {
            rhs / self.n as f64
        } else {
            rhs - (self.n as f64 - 1.0) / r * dv
        }
    }

    fn tail(&self, r: f64) -> (f64, f64) {
        let m = (self.n - 1) as f64 / 2.0;
        let v = self.decay_c * r.powf(-m) * (-r).exp();
        (v, -v * (1.0 + m / r))
    }

    /// ∫_0^∞ f(r, V, V') dr by Simpson on the grid plus Gauss–Legendre on the
    /// tail law. Returns (fine, coarse) where coarse uses every other node.
    pub fn radial_integral<F: Fn(f64, f64, f64) -> f64>(&self, f: F) -> (f64, f64) {
        let vals: Vec<f64> = (0..self.v.len()).map(|k| f(self.r_grid[k], self.v[k], self.dv[k])).collect();
        let fine = simpson(&vals, self.h);
        let coarse_vals: Vec<f64> = vals.iter().step_by(2).copied().collect();
        let mut coarse = simpson(&coarse_vals, 2.0 * self.h);
        let last_coarse = (coarse_vals.len() - 1) * 2;
        if last_coarse + 1 < vals.len() {
            coarse += 0.5 * self.h * (vals[last_coarse] + vals[last_coarse + 1]);
        }
        let rule = gauss_legendre(24);
        let mut tail = 0.0;
        let mut a = self.r_max;
        while a < self.r_max + 60.0 {
            for (r, w) in map_rule(&rule, a, a + 5.0) {
                let (v, dv) = self.tail(r);
                tail += w * f(r, v, dv);
            }
            a += 5.0;
        }
        (fine + tail, coarse + tail)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,V,dV\n");
        for k in 0..self.v.len() {
            s.push_str(&format!("{:.6},{:.17e},{:.17e}\n", self.r_grid[k], self.v[k], self.dv[k]));
        }
        s
    }
}

/// Cubic Hermite interpolation on the grid; tail law beyond r_max.
pub fn eval_profile(prof: &GroundStateProfile, r: f64) -> (f64, f64) {
    let r = r.abs();
    if r > prof.r_max {
        return prof.tail(r);
    }
    let x = r / prof.h;
    let k = (x.floor() as usize).min(prof.v.len() - 2);
    let t = x - k as f64;
    let h = prof.h;
    let (y0, y1) = (prof.v[k], prof.v[k + 1]);
    let (m0, m1) = (prof.dv[k] * h, prof.dv[k + 1] * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * m0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * m1;
    let dv = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1 + (3.0 * t2 - 2.0 * t) * m1) / h;
    (v, dv)
}

/// ∫ over the upper half of S^{n-1} of z_1^{2a} z_n^b, for real exponents.
pub(crate) fn angular_moment(n: usize, a: f64, b: f64) -> f64 {
    let beta1 = a + 0.5;
    let betan = 0.5 * (b + 1.0);
    let others = (n as f64 - 2.0) * 0.5;
    let ln_num = ln_gamma(beta1) + ln_gamma(betan) + (n as f64 - 2.0) * ln_gamma(0.5);
    let ln_den = ln_gamma(beta1 + betan + others);
    (ln_num - ln_den).exp()
}

/// ∫_{S^{n-1} ∩ {z_n > 0}} z_1^{2a} z_n^b dσ for a ∈ {0,1}, b ∈ {1,3}.
pub fn halfspace_angular_moment(n: usize, a: u32, b: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameters("angular moments need n >= 2".into()));
    }
    if a > 1 || !(b == 1 || b == 3) {
        return Err(Error::UnsupportedMoment { a, b });
    }
    Ok(angular_moment(n, a as f64, b as f64))
}

pub const M_GRAD2_ZN: &str = "grad_u_sq_zn";
pub const M_U2_ZN: &str = "u_sq_zn";
pub const M_UP_ZN: &str = "u_p_zn";
pub const M_DZN_SQ_ZN: &str = "dzn_u_sq_zn";
pub const M_DU_R_SQ_ZN3: &str = "du_over_r_sq_zn3";
pub const M_DU_R_SQ_Z1SQ_ZN: &str = "du_over_r_sq_z1sq_zn";
pub const M_UP_HALF: &str = "u_p_halfspace";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: f64,
    pub pohozaev_residual: f64,
    pub moments: BTreeMap<String, f64>,
}

struct Radial {
    /// ∫ V'^2 r^n dr
    d2_n: f64,
    /// ∫ V^2 r^n dr
    v2_n: f64,
    /// ∫ V^p r^n dr
    vp_n: f64,
}

fn radial_set(prof: &GroundStateProfile) -> Result<(Radial, Radial)> {
    let n = prof.n as i32;
    let p = prof.p;
    let parts = [
        prof.radial_integral(|r, _v, dv| dv * dv * r.powi(n)),
        prof.radial_integral(|r, v, _dv| v * v * r.powi(n)),
        prof.radial_integral(|r, v, _dv| pos_pow(v, p) * r.powi(n)),
    ];
    for (fine, coarse) in parts {
        if (fine - coarse).abs() > 1e-6 * fine.abs().max(1e-300) {
            return Err(Error::QuadratureUnstable { what: "radial moment".into(), coarse, fine });
        }
    }
    Ok((
        Radial { d2_n: parts[0].0, v2_n: parts[1].0, vp_n: parts[2].0 },
        Radial { d2_n: parts[0].1, v2_n: parts[1].1, vp_n: parts[2].1 },
    ))
}

fn energy_density_integral(prof: &GroundStateProfile) -> Result<(f64, f64)> {
    let n = prof.n as i32;
    let p = prof.p;
    let (e, e2) = prof.radial_integral(|r, v, dv| (0.5 * dv * dv + 0.5 * v * v - pos_pow(v, p) / p) * r.powi(n - 1));
    let (up, _) = prof.radial_integral(|r, v, _| pos_pow(v, p) * r.powi(n - 1));
    if (e - e2).abs() > 1e-6 * e.abs() {
        return Err(Error::QuadratureUnstable { what: "energy".into(), coarse: e2, fine: e });
    }
    Ok((e, up))
}

pub fn compute_constants(prof: &GroundStateProfile) -> Result<MomentReport> {
    if prof.n < 2 {
        return Err(Error::InvalidParameters("half-space constants need n >= 2".into()));
    }
    let n = prof.n;
    let p = prof.p;
    let (rad, _) = radial_set(prof)?;
    let (e, up) = energy_density_integral(prof)?;
    let half_sphere = angular_moment(n, 0.0, 0.0);
    let m01 = angular_moment(n, 0.0, 1.0);
    let m03 = angular_moment(n, 0.0, 3.0);
    let m11 = angular_moment(n, 1.0, 1.0);

    let c = half_sphere * e;
    let du_r_sq_zn3 = m03 * rad.d2_n;
    let alpha = 0.5 * (n as f64 - 1.0) * du_r_sq_zn3;

    let mut moments = BTreeMap::new();
    moments.insert(M_GRAD2_ZN.to_string(), m01 * rad.d2_n);
    moments.insert(M_U2_ZN.to_string(), m01 * rad.v2_n);
    moments.insert(M_UP_ZN.to_string(), m01 * rad.vp_n);
    moments.insert(M_DZN_SQ_ZN.to_string(), (m01 - (n as f64 - 1.0) * m11) * rad.d2_n);
    moments.insert(M_DU_R_SQ_ZN3.to_string(), du_r_sq_zn3);
    moments.insert(M_DU_R_SQ_Z1SQ_ZN.to_string(), m11 * rad.d2_n);
    moments.insert(M_UP_HALF.to_string(), half_sphere * up);

    let pohozaev_residual = pohozaev_from_moments(&moments, p);
    Ok(MomentReport { c, alpha, pohozaev_residual, moments })
}

fn pohozaev_from_moments(m: &BTreeMap<String, f64>, p: f64) -> f64 {
    let lhs = m[M_DZN_SQ_ZN];
    let rhs = 0.5 * m[M_GRAD2_ZN] + 0.5 * m[M_U2_ZN] - m[M_UP_ZN] / p;
    let alt = m[M_DU_R_SQ_ZN3];
    ((lhs - rhs).abs() / rhs.abs()).max((lhs - alt).abs() / alt.abs())
}

/// Relative residual of ∫(∂_{z_n}U)² z_n = ½∫|∇U|² z_n + ½∫U² z_n - (1/p)∫U^p z_n.
pub fn check_pohozaev_zn(prof: &GroundStateProfile) -> f64 {
    match compute_constants(prof) {
        Ok(rep) => rep.pohozaev_residual,
        Err(_) => f64::INFINITY,
    }
}

/// Relative Nehari defect |∫(|∇V|²+V²) - ∫V^p| / ∫V^p over R^n.
pub fn nehari_residual(prof: &GroundStateProfile) -> f64 {
    let n = prof.n as i32;
    let p = prof.p;
    let (a, _) = prof.radial_integral(|r, v, dv| (dv * dv + v * v) * r.powi(n - 1));
    let (b, _) = prof.radial_integral(|r, v, _| pos_pow(v, p) * r.powi(n - 1));
    (a - b).abs() / b
}

pub const DEFAULT_R_MAX: f64 = 30.0;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_SHOOT_TOL: f64 = 1e-7;

/// Profile at the default resolution.
pub fn default_profile(n: usize, p: f64) -> Result<GroundStateProfile> {
    solve_ground_state(Parameters::new(n, p)?, DEFAULT_R_MAX, DEFAULT_STEP, DEFAULT_SHOOT_TOL)
}
