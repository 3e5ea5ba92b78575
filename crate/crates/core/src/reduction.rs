//! Peak ansatz W_{ε,ξ}, its energy J_ε(W_{ε,ξ}) by quadrature in rescaled
//! Fermi coordinates, and the fit J ≈ C - ε α H(ξ).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{find_critical_points, BoundaryManifold, BoundaryPoint, CriticalKind, CriticalPoint, FermiChart, V3};
use crate::numerics::{gauss_legendre, linear_fit, map_rule};
use crate::profile::{pos_pow, GroundStateProfile, MomentReport};

/// Radial cutoff: 1 on [0, R/2], 0 on [R, ∞), quintic smoothstep between
/// (C² at both ends). max |χ'| = 3.75 / R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub r: f64,
}

impl Cutoff {
    pub fn value(&self, rho: f64) -> f64 {
        let x = (2.0 * rho / self.r - 1.0).clamp(0.0, 1.0);
        1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }

    pub fn deriv(&self, rho: f64) -> f64 {
        let x = 2.0 * rho / self.r - 1.0;
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        -30.0 * x * x * (1.0 - x) * (1.0 - x) * 2.0 / self.r
    }

    pub fn max_slope(&self) -> f64 {
        3.75 / self.r
    }
}

/// W_{ε,ξ} = U(|y|/ε) χ(|y|) in Fermi coordinates y at ξ.
#[derive(Debug, Clone)]
pub struct PeakAnsatz<'a> {
    pub eps: f64,
    pub chart: FermiChart<'a>,
    pub cutoff: Cutoff,
    pub profile: &'a GroundStateProfile,
}

impl<'a> PeakAnsatz<'a> {
    pub fn new(
        manifold: &'a BoundaryManifold,
        profile: &'a GroundStateProfile,
        eps: f64,
        xi: BoundaryPoint,
        r_cut: f64,
    ) -> Result<PeakAnsatz<'a>> {
        if profile.n != manifold.n() {
            return Err(Error::DimensionMismatch { expected: manifold.n(), got: profile.n });
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameters(format!("eps = {eps} must be positive")));
        }
        let chart = FermiChart::new(manifold, xi);
        if !(r_cut > 0.0 && r_cut < chart.r_chart) {
            return Err(Error::ChartOverflow { r_cut, r_chart: chart.r_chart });
        }
        Ok(PeakAnsatz { eps, chart, cutoff: Cutoff { r: r_cut }, profile })
    }

    /// Fermi coordinates of x, or None outside the support.
    fn coords(&self, x: &V3) -> Option<(Vec<f64>, f64)> {
        let (ybar, yn) = self.chart.inverse(x).ok()?;
        if yn < -1e-9 * self.cutoff.r {
            return None;
        }
        let yn = yn.max(0.0);
        let r2 = ybar.iter().map(|v| v * v).sum::<f64>() + yn * yn;
        if r2 >= self.cutoff.r * self.cutoff.r {
            return None;
        }
        Some((ybar, yn))
    }

    pub fn value(&self, x: &V3) -> f64 {
        match self.coords(x) {
            Some((ybar, yn)) => self.value_in_chart(&ybar, yn),
            None => 0.0,
        }
    }

    pub fn value_in_chart(&self, ybar: &[f64], yn: f64) -> f64 {
        let r = (ybar.iter().map(|v| v * v).sum::<f64>() + yn * yn).sqrt();
        self.profile.eval(r / self.eps).0 * self.cutoff.value(r)
    }

    /// Z^i = (U'(|z|)/|z|) z_i χ, z = y/ε, i in 1..n-1.
    pub fn basis(&self, i: usize, x: &V3) -> f64 {
        match self.coords(x) {
            Some((ybar, yn)) => self.basis_in_chart(i, &ybar, yn),
            None => 0.0,
        }
    }

    pub fn basis_in_chart(&self, i: usize, ybar: &[f64], yn: f64) -> f64 {
        assert!(i >= 1 && i < self.chart.n(), "basis index must lie in 1..n-1");
        let r = (ybar.iter().map(|v| v * v).sum::<f64>() + yn * yn).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let rho = r / self.eps;
        let (_, du) = self.profile.eval(rho);
        du / rho * (ybar[i - 1] / self.eps) * self.cutoff.value(r)
    }
}

pub fn eval_ansatz(a: &PeakAnsatz, x: &V3) -> f64 {
    a.value(x)
}

pub fn basis_function(a: &PeakAnsatz, i: usize, x: &V3) -> f64 {
    a.basis(i, x)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadSpec {
    pub r_cut: f64,
    pub n_theta: usize,
    pub n_per_panel: usize,
    pub tol: f64,
}

impl QuadSpec {
    pub fn with_cutoff(r_cut: f64) -> QuadSpec {
        QuadSpec { r_cut, n_theta: 48, n_per_panel: 16, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReducedEnergySample {
    pub eps: f64,
    /// Boundary parameter of ξ (t for curves, (θ, φ) for surfaces).
    pub xi_param: Vec<f64>,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "gradJ")]
    pub grad_j: Vec<f64>,
    #[serde(rename = "H")]
    pub h: f64,
    pub quad_error: f64,
}

fn radial_breaks(rho_max: f64, extra: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.5, 7.0, 9.0, 11.5, 14.5, 18.0, 22.5, 28.0, 34.0, 40.0]
        .iter()
        .copied()
        .filter(|v| *v < rho_max)
        .collect();
    for &e in extra {
        if e > 0.0 && e < rho_max {
            b.push(e);
        }
    }
    b.push(rho_max);
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b.dedup_by(|a, c| (*a - *c).abs() < 1e-12);
    b
}

/// J_ε(W) for a planar curve, with the exact Fermi metric
/// √g = 1 - κ(s) y_n, g^{11} = (1 - κ(s) y_n)^{-2}, g^{22} = 1.
fn energy_planar(m: &BoundaryManifold, prof: &GroundStateProfile, eps: f64, s0: f64, q: &QuadSpec, n_theta: usize, n_per: usize) -> f64 {
    let p = prof.p;
    let cut = Cutoff { r: q.r_cut };
    let rho_max = (q.r_cut / eps).min(40.0);
    let breaks = radial_breaks(rho_max, &[0.5 * q.r_cut / eps]);
    let rr = gauss_legendre(n_per);
    let tr = gauss_legendre(n_theta);
    let thetas: Vec<(f64, f64)> = map_rule(&tr, 0.0, std::f64::consts::PI).collect();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        for (rho, wr) in map_rule(&rr, w[0], w[1]) {
            let (u, du) = prof.eval(rho);
            let r = eps * rho;
            let chi = cut.value(r);
            let wv = u * chi;
            let dw = du * chi + u * eps * cut.deriv(r);
            let pot = 0.5 * wv * wv - pos_pow(wv, p) / p;
            let mut ang = 0.0;
            for &(th, wt) in &thetas {
                let (c, s) = (th.cos(), th.sin());
                let kappa = m.curvature_at_arclength(s0 + r * c);
                let a = 1.0 - kappa * r * s;
                let grad2 = dw * dw * (c * c / (a * a) + s * s);
                ang += wt * (0.5 * grad2 + pot) * a;
            }
            total += wr * rho * ang;
        }
    }
    total
}

/// J_ε(W) on a surface, with the metric from the Fermi chart.
fn energy_surface(chart: &FermiChart, prof: &GroundStateProfile, eps: f64, q: &QuadSpec, n_theta: usize, n_per: usize) -> Result<f64> {
    let p = prof.p;
    let cut = Cutoff { r: q.r_cut };
    let rho_max = (q.r_cut / eps).min(40.0);
    let breaks = radial_breaks(rho_max, &[0.5 * q.r_cut / eps]);
    let rr = gauss_legendre(n_per);
    let pol = gauss_legendre((n_theta / 4).max(6));
    let azi = gauss_legendre((n_theta / 2).max(12));
    let pols: Vec<(f64, f64)> = map_rule(&pol, 0.0, std::f64::consts::FRAC_PI_2).collect();
    let azis: Vec<(f64, f64)> = map_rule(&azi, 0.0, 2.0 * std::f64::consts::PI).collect();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        for (rho, wr) in map_rule(&rr, w[0], w[1]) {
            let (u, du) = prof.eval(rho);
            let r = eps * rho;
            let chi = cut.value(r);
            let wv = u * chi;
            let dw = du * chi + u * eps * cut.deriv(r);
            let pot = 0.5 * wv * wv - pos_pow(wv, p) / p;
            let mut ang = 0.0;
            for &(vt, wv_t) in &pols {
                for &(ph, wp) in &azis {
                    let dir = [vt.sin() * ph.cos(), vt.sin() * ph.sin(), vt.cos()];
                    let ybar = [r * dir[0], r * dir[1]];
                    let ms = chart.metric(&ybar, r * dir[2])?;
                    let mut quad = 0.0;
                    for i in 0..3 {
                        for j in 0..3 {
                            quad += dir[i] * ms.g_inv[(i, j)] * dir[j];
                        }
                    }
                    ang += wv_t * wp * vt.sin() * (0.5 * dw * dw * quad + pot) * ms.sqrt_det;
                }
            }
            total += wr * rho * rho * ang;
        }
    }
    Ok(total)
}

fn check_inputs(m: &BoundaryManifold, prof: &GroundStateProfile, eps: f64, q: &QuadSpec) -> Result<()> {
    if prof.n != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), got: prof.n });
    }
    if !(q.r_cut > 0.0 && q.r_cut < m.reach()) {
        return Err(Error::ChartOverflow { r_cut: q.r_cut, r_chart: m.reach() });
    }
    if !(eps > 0.0 && eps <= q.r_cut / 10.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameters(format!("eps = {eps} must lie in (0, R_cut/10 = {}]", q.r_cut / 10.0)));
    }
    Ok(())
}

/// J_ε(W_{ε,ξ}) alone, with its quadrature error estimate.
pub fn energy_value(m: &BoundaryManifold, prof: &GroundStateProfile, eps: f64, xi: &BoundaryPoint, q: &QuadSpec) -> Result<(f64, f64)> {
    check_inputs(m, prof, eps, q)?;
    let (j, j_fine) = match m.n() {
        2 => {
            let s0 = m.arclength(xi.param[0]);
            (
                energy_planar(m, prof, eps, s0, q, q.n_theta, q.n_per_panel),
                energy_planar(m, prof, eps, s0, q, q.n_theta * 3 / 2, q.n_per_panel * 3 / 2),
            )
        }
        _ => {
            let chart = FermiChart::new(m, *xi);
            (
                energy_surface(&chart, prof, eps, q, q.n_theta, q.n_per_panel)?,
                energy_surface(&chart, prof, eps, q, q.n_theta * 3 / 2, q.n_per_panel * 3 / 2)?,
            )
        }
    };
    let err = (j - j_fine).abs();
    if err > q.tol.max(1e-12) * 10.0 {
        return Err(Error::QuadratureUnstable { what: "reduced energy".into(), coarse: j, fine: j_fine });
    }
    Ok((j_fine, err))
}

/// J_ε(W_{ε,ξ}) and its tangential gradient (centered differences along
/// boundary geodesics, step ε/10).
pub fn reduced_energy(m: &BoundaryManifold, prof: &GroundStateProfile, eps: f64, xi: &BoundaryPoint, q: &QuadSpec) -> Result<ReducedEnergySample> {
    let (j, err) = energy_value(m, prof, eps, xi, q)?;
    let d = m.n() - 1;
    let delta = eps / 10.0;
    let mut grad_j = vec![0.0; d];
    let mut err_total = err;
    for i in 0..d {
        let mut yp = vec![0.0; d];
        yp[i] = delta;
        let ym: Vec<f64> = yp.iter().map(|v| -v).collect();
        let xp = m.exp(xi, &yp)?;
        let xm = m.exp(xi, &ym)?;
        let (jp, ep) = energy_value(m, prof, eps, &xp, q)?;
        let (jm, em) = energy_value(m, prof, eps, &xm, q)?;
        grad_j[i] = (jp - jm) / (2.0 * delta);
        err_total = err_total.max(ep).max(em);
    }
    let xi_param = if d == 1 { vec![xi.param[0]] } else { xi.param.to_vec() };
    Ok(ReducedEnergySample { eps, xi_param, j, grad_j, h: m.mean_curvature_at(xi), quad_error: err_total })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionFit {
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub slope_hat: f64,
    /// None when |H(ξ)| is below tolerance.
    pub alpha_hat: Option<f64>,
    pub r2: f64,
    pub eps_min: f64,
    pub eps_max: f64,
}

impl ExpansionFit {
    pub fn alpha(&self, h: f64) -> Result<f64> {
        self.alpha_hat.ok_or(Error::DegenerateH(h))
    }
}

/// Least-squares line J = C_hat + slope ε over samples at one ξ.
pub fn fit_expansion(samples: &[ReducedEnergySample]) -> Result<ExpansionFit> {
    if samples.len() < 4 {
        return Err(Error::InvalidParameters(format!("need at least 4 eps values, got {}", samples.len())));
    }
    let eps: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let j: Vec<f64> = samples.iter().map(|s| s.j).collect();
    let eps_min = eps.iter().copied().fold(f64::INFINITY, f64::min);
    let eps_max = eps.iter().copied().fold(0.0, f64::max);
    if eps_max < 4.0 * eps_min * (1.0 - 1e-12) {
        return Err(Error::InvalidParameters(format!("eps range [{eps_min}, {eps_max}] spans less than a factor 4")));
    }
    let h = samples[0].h;
    if samples.iter().any(|s| s.xi_param != samples[0].xi_param) {
        return Err(Error::InvalidParameters("samples must share the same xi".into()));
    }
    let fit = linear_fit(&eps, &j);
    let alpha_hat = if h.abs() > 1e-8 { Some(-fit.slope / h) } else { None };
    Ok(ExpansionFit { c_hat: fit.intercept, slope_hat: fit.slope, alpha_hat, r2: fit.r2, eps_min, eps_max })
}

/// ε values in the fit window [R/200, R/25], geometrically spaced.
pub fn fit_window(r_cut: f64, count: usize) -> Vec<f64> {
    let lo = r_cut / 200.0;
    let hi = r_cut / 25.0;
    (0..count)
        .map(|k| hi * (lo / hi).powf(k as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientReport {
    pub eps: f64,
    #[serde(rename = "gradJ")]
    pub grad_j: Vec<f64>,
    pub predicted: Vec<f64>,
    #[serde(rename = "dH")]
    pub dh: Vec<f64>,
    pub relative_deviation: f64,
}

/// Compare ∇_ξ J_ε(W_{ε,ξ}) with -ε α ∇H(ξ).
pub fn gradient_check(m: &BoundaryManifold, prof: &GroundStateProfile, consts: &MomentReport, eps: f64, xi: &BoundaryPoint, q: &QuadSpec) -> Result<GradientReport> {
    let dh = m.mean_curvature_gradient(xi);
    let dh_norm = dh.iter().map(|v| v * v).sum::<f64>().sqrt();
    if dh_norm < 1e-8 {
        return Err(Error::DegenerateH(dh_norm));
    }
    let sample = reduced_energy(m, prof, eps, xi, q)?;
    let predicted: Vec<f64> = dh.iter().map(|d| -eps * consts.alpha * d).collect();
    let num: f64 = sample.grad_j.iter().zip(&predicted).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den: f64 = predicted.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(GradientReport { eps, grad_j: sample.grad_j, predicted, dh, relative_deviation: num / den })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakRole {
    /// Maximum of H: lowest reduced energy, mountain-pass spike.
    MountainPass,
    Secondary,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakPrediction {
    pub point: CriticalPoint,
    pub proxy_energy: f64,
    pub role: PeakRole,
}

/// Stable critical points of H ordered by the proxy C - ε α H.
pub fn predict_peaks(m: &BoundaryManifold, consts: &MomentReport, eps: f64) -> Result<Vec<PeakPrediction>> {
    let pts = find_critical_points(m, 512)?;
    let mut out: Vec<PeakPrediction> = pts
        .into_iter()
        .filter(|p| p.stable)
        .map(|p| {
            let proxy_energy = consts.c - eps * consts.alpha * p.value;
            let role = if p.kind == CriticalKind::Max { PeakRole::MountainPass } else { PeakRole::Secondary };
            PeakPrediction { point: p, proxy_energy, role }
        })
        .collect();
    out.sort_by(|a, b| a.proxy_energy.partial_cmp(&b.proxy_energy).unwrap());
    Ok(out)
}

pub fn landscape_csv(samples: &[ReducedEnergySample]) -> String {
    let mut s = String::from("xi_param,eps,J,gradJ,H\n");
    for x in samples {
        let g = x.grad_j.iter().map(|v| v * v).sum::<f64>().sqrt() * x.grad_j.first().map(|v| v.signum()).unwrap_or(1.0);
        s.push_str(&format!("{:.12},{:.6e},{:.15e},{:.15e},{:.15e}\n", x.xi_param[0], x.eps, x.j, g, x.h));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ManifoldSpec;
    use crate::profile::{compute_constants, default_profile};

    #[test]
    fn cutoff_shape() {
        let c = Cutoff { r: 0.4 };
        assert_eq!(c.value(0.0), 1.0);
        assert_eq!(c.value(0.2), 1.0);
        assert_eq!(c.value(0.4), 0.0);
        assert!(c.value(0.3) > 0.0 && c.value(0.3) < 1.0);
        let mut worst: f64 = 0.0;
        for k in 0..=1000 {
            let r = 0.4 * k as f64 / 1000.0;
            worst = worst.max(c.deriv(r).abs());
            let fd = (c.value(r + 1e-7) - c.value(r - 1e-7)) / 2e-7;
            assert!((fd - c.deriv(r)).abs() < 1e-5);
        }
        assert!((worst - c.max_slope()).abs() < 1e-3);
        assert!(Cutoff { r: 2.0 }.max_slope() <= 2.0);
    }

    #[test]
    fn ansatz_point_values() {
        let prof = default_profile(2, 4.0).unwrap();
        let m = BoundaryManifold::new(ManifoldSpec::Disk { radius: 1.0, orientation: 1 }).unwrap();
        let eps = 0.05;
        let a = PeakAnsatz::new(&m, &prof, eps, m.curve_point(0.0), 0.5).unwrap();
        assert!((a.value(&V3::new(1.0, 0.0, 0.0)) - prof.v0()).abs() < 1e-12);
        for r in [0.3, 1.7, 4.0] {
            let x = V3::new(1.0 - eps * r, 0.0, 0.0);
            assert!((a.value(&x) - prof.eval(r).0).abs() < 1e-10);
        }
        assert_eq!(a.value(&V3::new(0.3, 0.0, 0.0)), 0.0);
        assert_eq!(a.basis(1, &V3::new(1.0, 0.0, 0.0)), 0.0);
        let chart = FermiChart::new(&m, m.curve_point(0.0));
        let xp = chart.fermi_map(&[0.03], 0.02).unwrap();
        let xm = chart.fermi_map(&[-0.03], 0.02).unwrap();
        assert!((a.basis(1, &xp) + a.basis(1, &xm)).abs() < 1e-9);
        assert!(a.basis(1, &xp).abs() > 0.1);
    }

    #[test]
    fn synthetic_line_fit() {
        let samples: Vec<ReducedEnergySample> = [0.02, 0.03, 0.04, 0.06, 0.08]
            .iter()
            .map(|&e| ReducedEnergySample { eps: e, xi_param: vec![0.0], j: 7.0 - 2.0 * e, grad_j: vec![0.0], h: 1.0, quad_error: 0.0 })
            .collect();
        let fit = fit_expansion(&samples).unwrap();
        assert!((fit.c_hat - 7.0).abs() < 1e-12 && (fit.slope_hat + 2.0).abs() < 1e-12);
        assert!((fit.alpha_hat.unwrap() - 2.0).abs() < 1e-12);
        assert!(fit_expansion(&samples[..3]).is_err());
        let flat: Vec<_> = samples.iter().cloned().map(|mut s| {
            s.h = 0.0;
            s
        }).collect();
        let fit = fit_expansion(&flat).unwrap();
        assert!(matches!(fit.alpha(0.0), Err(Error::DegenerateH(_))));
    }

    #[test]
    fn disk_energy_tends_to_c() {
        let prof = default_profile(2, 4.0).unwrap();
        let consts = compute_constants(&prof).unwrap();
        let m = BoundaryManifold::new(ManifoldSpec::Disk { radius: 1.0, orientation: 1 }).unwrap();
        let q = QuadSpec::with_cutoff(0.9);
        let mut last = f64::INFINITY;
        for eps in [0.02, 0.01, 0.005] {
            let (j, _) = energy_value(&m, &prof, eps, &m.curve_point(0.0), &q).unwrap();
            let gap = (j - consts.c).abs();
            assert!(gap < last);
            assert!((consts.c - j - eps * consts.alpha).abs() < 2.0 * eps * eps * consts.c, "eps={eps}");
            last = gap;
        }
    }

    #[test]
    fn ellipse_ordering_and_symmetry() {
        let prof = default_profile(2, 4.0).unwrap();
        let m = BoundaryManifold::new(ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 }).unwrap();
        let q = QuadSpec::with_cutoff(0.45);
        let eps = 0.02;
        let (j_max, _) = energy_value(&m, &prof, eps, &m.curve_point(0.0), &q).unwrap();
        let (j_min, _) = energy_value(&m, &prof, eps, &m.curve_point(std::f64::consts::FRAC_PI_2), &q).unwrap();
        assert!(j_max < j_min);
        let s = reduced_energy(&m, &prof, eps, &m.curve_point(0.0), &q).unwrap();
        assert!(s.grad_j[0].abs() < eps * eps);
    }

    #[test]
    fn preconditions_are_enforced() {
        let prof = default_profile(2, 4.0).unwrap();
        let m = BoundaryManifold::new(ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 }).unwrap();
        let xi = m.curve_point(0.0);
        assert!(matches!(energy_value(&m, &prof, 0.01, &xi, &QuadSpec::with_cutoff(0.6)), Err(Error::ChartOverflow { .. })));
        assert!(energy_value(&m, &prof, 0.05, &xi, &QuadSpec::with_cutoff(0.4)).is_err());
        let prof3 = default_profile(3, 3.0).unwrap();
        assert!(matches!(energy_value(&m, &prof3, 0.01, &xi, &QuadSpec::with_cutoff(0.4)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn peak_prediction_on_ellipse() {
        let prof = default_profile(2, 4.0).unwrap();
        let consts = compute_constants(&prof).unwrap();
        let m = BoundaryManifold::new(ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 }).unwrap();
        let peaks = predict_peaks(&m, &consts, 0.05).unwrap();
        assert_eq!(peaks.len(), 4);
        for p in &peaks[..2] {
            assert_eq!(p.role, PeakRole::MountainPass);
            assert!((p.point.location[0].abs() - 2.0).abs() < 1e-9);
        }
        let d = BoundaryManifold::new(ManifoldSpec::Disk { radius: 1.0, orientation: 1 }).unwrap();
        assert!(matches!(predict_peaks(&d, &consts, 0.05), Err(Error::DegenerateLandscape { .. })));
    }

    #[test]
    fn cutoff_radius_does_not_matter_for_small_eps() {
        let prof = default_profile(2, 4.0).unwrap();
        let m = BoundaryManifold::new(ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 }).unwrap();
        let xi = m.curve_point(0.3);
        let eps = 0.005;
        let (j1, _) = energy_value(&m, &prof, eps, &xi, &QuadSpec::with_cutoff(0.3)).unwrap();
        let (j2, _) = energy_value(&m, &prof, eps, &xi, &QuadSpec::with_cutoff(0.4)).unwrap();
        assert!((j1 - j2).abs() < 1e-8, "{j1} {j2}");
    }

    #[test]
    fn gradient_matches_curvature_slope() {
        let prof = default_profile(2, 4.0).unwrap();
        let consts = compute_constants(&prof).unwrap();
        let m = BoundaryManifold::new(ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 }).unwrap();
        let xi = m.curve_point(0.7);
        let q = QuadSpec::with_cutoff(0.2);
        let g1 = gradient_check(&m, &prof, &consts, 0.02, &xi, &q).unwrap();
        let g2 = gradient_check(&m, &prof, &consts, 0.01, &xi, &q).unwrap();
        assert!(g1.relative_deviation < 0.1);
        assert!(g2.relative_deviation < g1.relative_deviation);
    }
}
