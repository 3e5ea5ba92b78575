//! Planar solves of −ε²Δu + u = (u⁺)^{p−1} with Neumann data: P1 finite
//! elements with lumped mass on a boundary-fitted Delaunay mesh.
//!
//! Mesh: boundary nodes equally spaced in arc length (the first at t = 0),
//! a few staggered layers parallel to the boundary at spacing h√3/2, and
//! an equilateral lattice core. The lattice and all layers are symmetric
//! about the x-axis. Delaunay meshes give a stiffness matrix with
//! non-positive off-diagonals, so ε²K + M is an M-matrix.

use std::collections::HashMap;

use serde::Serialize;
use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::{find_critical_points, BoundaryManifold, ManifoldSpec, V3};
use crate::linalg::{dot, Csr, Factor};
use crate::numerics::loglog_slope;
use crate::profile::{pos_pow, GroundStateProfile};
use crate::reduction::PeakAnsatz;

const LAYERS: usize = 3;

pub struct DiscreteDomain {
    pub manifold: BoundaryManifold,
    pub h_mesh: f64,
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary node indices in order of increasing curve parameter.
    pub boundary: Vec<usize>,
    pub stiffness: Csr,
    /// Lumped mass (quadrature weights).
    pub mass: Vec<f64>,
}

pub type DiscreteField = Vec<f64>;

fn semi_axes(spec: &ManifoldSpec) -> Result<(f64, f64)> {
    match *spec {
        ManifoldSpec::Disk { radius, .. } => Ok((radius, radius)),
        ManifoldSpec::Ellipse { a, b, .. } => Ok((a, b)),
        _ => Err(Error::InvalidParameters("discretization needs a planar boundary (n = 2)".into())),
    }
}

pub fn discretize(m: &BoundaryManifold, h_mesh: f64) -> Result<DiscreteDomain> {
    let (a, b) = semi_axes(&m.spec())?;
    if m.orientation() < 0.0 {
        return Err(Error::InvalidParameters("discretization needs the interior orientation".into()));
    }
    if !(h_mesh > 0.0) {
        return Err(Error::InvalidParameters(format!("h_mesh = {h_mesh} must be positive")));
    }
    let kappa_max = a.max(b) / a.min(b).powi(2);
    let per_radius = 1.0 / (kappa_max * h_mesh);
    if per_radius < 40.0 * (1.0 - 1e-12) {
        return Err(Error::MeshTooCoarse { nodes_per_radius: per_radius });
    }
    let perimeter = m.perimeter();
    let row = h_mesh * 3f64.sqrt() / 2.0;
    let mut pts: Vec<[f64; 2]> = Vec::new();

    let nb = (perimeter / h_mesh).round() as usize;
    let mut params = Vec::with_capacity(nb);
    for k in 0..nb {
        let t = m.param_at_arclength(k as f64 * perimeter / nb as f64);
        params.push(t);
        let q = m.curve_point(t);
        pts.push([q.x[0], q.x[1]]);
    }
    let boundary: Vec<usize> = (0..nb).collect();
    for layer in 1..=LAYERS {
        let d = layer as f64 * row;
        let count = ((perimeter - 2.0 * std::f64::consts::PI * d) / h_mesh).round() as usize;
        let shift = if layer % 2 == 1 { 0.5 } else { 0.0 };
        for k in 0..count {
            let q = m.point_at_arclength((k as f64 + shift) * perimeter / count as f64);
            let x = q.x + d * q.normal;
            pts.push([x[0], x[1]]);
        }
    }
    let core_min = (LAYERS as f64 + 0.6) * row;
    let jmax = (b / row).ceil() as i64;
    let imax = (a / h_mesh).ceil() as i64 + 1;
    for j in -jmax..=jmax {
        let y = j as f64 * row;
        let off = if j.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
        for i in -imax..=imax {
            let x = (i as f64 + off) * h_mesh;
            let p = V3::new(x, y, 0.0);
            if (x / a).powi(2) + (y / b).powi(2) >= 1.0 {
                continue;
            }
            let (_, dist) = m.closest_point(&p);
            if dist > core_min {
                pts.push([x, y]);
            }
        }
    }

    let edges: Vec<[usize; 2]> = (0..nb).map(|k| [k, (k + 1) % nb]).collect();
    let verts: Vec<Point2<f64>> = pts.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(verts, edges)
        .map_err(|e| Error::InvalidParameters(format!("triangulation failed: {e:?}")))?;
    let lookup: HashMap<(u64, u64), usize> = pts.iter().enumerate().map(|(i, p)| ((p[0].to_bits(), p[1].to_bits()), i)).collect();
    let mut triangles = Vec::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices();
        let mut tri = [0usize; 3];
        for (slot, v) in tri.iter_mut().zip(vs.iter()) {
            let p = v.position();
            *slot = *lookup
                .get(&(p.x.to_bits(), p.y.to_bits()))
                .ok_or_else(|| Error::InvalidParameters("triangulation moved a vertex".into()))?;
        }
        triangles.push(tri);
    }
    if cdt.num_vertices() != pts.len() {
        return Err(Error::InvalidParameters("duplicate mesh vertices".into()));
    }

    let len = pts.len();
    let mut mass = vec![0.0; len];
    let mut t = Vec::with_capacity(9 * triangles.len());
    for tri in &triangles {
        let p: Vec<[f64; 2]> = tri.iter().map(|&i| pts[i]).collect();
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
        let area = area.abs();
        // Gradients of the barycentric functions.
        let grads: Vec<[f64; 2]> = (0..3)
            .map(|k| {
                let (j, l) = ((k + 1) % 3, (k + 2) % 3);
                let e = [p[l][0] - p[j][0], p[l][1] - p[j][1]];
                let s = if (p[j][0] - p[k][0]) * (p[l][1] - p[k][1]) - (p[l][0] - p[k][0]) * (p[j][1] - p[k][1]) > 0.0 { 1.0 } else { -1.0 };
                [-s * e[1] / (2.0 * area), s * e[0] / (2.0 * area)]
            })
            .collect();
        for k in 0..3 {
            mass[tri[k]] += area / 3.0;
            for l in 0..3 {
                t.push((tri[k], tri[l], area * (grads[k][0] * grads[l][0] + grads[k][1] * grads[l][1])));
            }
        }
    }
    for k in 0..nb {
        let t0 = params[k];
        let mut t1 = params[(k + 1) % nb];
        if t1 <= t0 {
            t1 += 2.0 * std::f64::consts::PI;
        }
        let dt = t1 - t0;
        let seg = 0.5 * a * b * (dt - dt.sin());
        mass[k] += 0.5 * seg;
        mass[(k + 1) % nb] += 0.5 * seg;
    }
    let stiffness = Csr::from_triplets(len, t);
    Ok(DiscreteDomain { manifold: m.clone(), h_mesh, nodes: pts, triangles, boundary, stiffness, mass })
}

impl DiscreteDomain {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, u: &[f64]) -> f64 {
        dot(&self.mass, u)
    }

    /// Nodal values of a function of position.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> DiscreteField {
        self.nodes.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Lumped discrete Laplacian −M^{-1} K u.
    pub fn laplacian(&self, u: &[f64]) -> DiscreteField {
        self.stiffness.mul(u).iter().zip(&self.mass).map(|(k, m)| -k / m).collect()
    }

    /// Sample W_{ε,ξ} at the nodes; nodes farther than R from ξ are 0.
    pub fn sample_ansatz(&self, a: &PeakAnsatz) -> DiscreteField {
        self.sample_chart_field(a, |x| a.value(x))
    }

    pub fn sample_basis(&self, a: &PeakAnsatz, i: usize) -> DiscreteField {
        self.sample_chart_field(a, |x| a.basis(i, x))
    }

    fn sample_chart_field<F: Fn(&V3) -> f64>(&self, a: &PeakAnsatz, f: F) -> DiscreteField {
        // On a convex domain the Fermi radius dominates the chord, so
        // |x − ξ| ≥ R already puts x outside the support.
        let xi = a.chart.base.x;
        let r = a.cutoff.r;
        self.nodes
            .iter()
            .map(|p| {
                let x = V3::new(p[0], p[1], 0.0);
                if (x - xi).norm() >= r {
                    0.0
                } else {
                    f(&x)
                }
            })
            .collect()
    }
}

/// ‖u‖_ε² = ε^{-2} (ε² uᵀKu + uᵀMu).
pub fn discrete_norm(d: &DiscreteDomain, u: &[f64], eps: f64) -> f64 {
    discrete_inner(d, u, u, eps).max(0.0).sqrt()
}

pub fn discrete_inner(d: &DiscreteDomain, u: &[f64], v: &[f64], eps: f64) -> f64 {
    let ku = d.stiffness.mul(u);
    let muv: f64 = u.iter().zip(v).zip(&d.mass).map(|((a, b), m)| a * b * m).sum();
    (eps * eps * dot(&ku, v) + muv) / (eps * eps)
}

/// |v|_{q,ε} = (ε^{-2} ∫|v|^q)^{1/q}.
pub fn discrete_lq_norm(d: &DiscreteDomain, v: &[f64], q: f64, eps: f64) -> f64 {
    let s: f64 = v.iter().zip(&d.mass).map(|(a, m)| m * a.abs().powf(q)).sum();
    (s / (eps * eps)).powf(1.0 / q)
}

/// Factored (ε²K + M) for repeated i*_ε applications.
pub struct IStar<'a> {
    pub domain: &'a DiscreteDomain,
    pub eps: f64,
    factor: Factor,
}

impl<'a> IStar<'a> {
    pub fn new(domain: &'a DiscreteDomain, eps: f64) -> Result<IStar<'a>> {
        let a = domain.stiffness.scaled_plus_diag(eps * eps, &domain.mass);
        Ok(IStar { domain, eps, factor: a.cholesky()? })
    }

    /// u with (ε²K + M) u = M v.
    pub fn apply(&self, v: &[f64]) -> DiscreteField {
        let rhs: Vec<f64> = v.iter().zip(&self.domain.mass).map(|(a, m)| a * m).collect();
        self.factor.solve(&rhs)
    }
}

pub fn apply_istar(d: &DiscreteDomain, eps: f64, v: &[f64]) -> Result<DiscreteField> {
    Ok(IStar::new(d, eps)?.apply(v))
}

#[derive(Debug, Clone, Serialize)]
pub struct RemainderSample {
    pub eps: f64,
    pub norm: f64,
    /// max_i |⟨Π⊥r, Z^i⟩_ε| / (‖Π⊥r‖_ε ‖Z^i‖_ε).
    pub projection_residual: f64,
    /// ⟨Z^1, Z^1⟩_ε.
    pub gram: f64,
}

/// ‖Π⊥(i*_ε[f(W)] − W)‖_ε with Π⊥ the ⟨·,·⟩_ε-orthogonal projection off
/// span{Z^1}.
pub fn remainder_norm(d: &DiscreteDomain, prof: &GroundStateProfile, eps: f64, xi_param: f64, r_cut: f64) -> Result<RemainderSample> {
    if !(eps > 0.0 && eps <= r_cut / 5.0 * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameters(format!("eps = {eps} must lie in (0, R_cut/5 = {}]", r_cut / 5.0)));
    }
    let m = &d.manifold;
    let a = PeakAnsatz::new(m, prof, eps, m.curve_point(xi_param), r_cut)?;
    let w = d.sample_ansatz(&a);
    let z = d.sample_basis(&a, 1);
    let fw: Vec<f64> = w.iter().map(|v| pos_pow(*v, prof.p - 1.0)).collect();
    let istar = IStar::new(d, eps)?;
    let mut r = istar.apply(&fw);
    for (ri, wi) in r.iter_mut().zip(&w) {
        *ri -= wi;
    }
    let gram = discrete_inner(d, &z, &z, eps);
    if !(gram > 1e-3) {
        return Err(Error::LinearSolveFailed(format!("basis Gram {gram} is ill conditioned")));
    }
    let c = discrete_inner(d, &r, &z, eps) / gram;
    for (ri, zi) in r.iter_mut().zip(&z) {
        *ri -= c * zi;
    }
    let norm = discrete_norm(d, &r, eps);
    let projection_residual = discrete_inner(d, &r, &z, eps).abs() / (norm * gram.sqrt()).max(f64::MIN_POSITIVE);
    Ok(RemainderSample { eps, norm, projection_residual, gram })
}

#[derive(Debug, Clone, Serialize)]
pub struct RemainderStudy {
    pub samples: Vec<RemainderSample>,
    pub slope: f64,
    pub predicted_slope: f64,
}

pub fn remainder_study(d: &DiscreteDomain, prof: &GroundStateProfile, eps_list: &[f64], xi_param: f64, r_cut: f64) -> Result<RemainderStudy> {
    let samples = eps_list.iter().map(|&e| remainder_norm(d, prof, e, xi_param, r_cut)).collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.norm).collect();
    let slope = loglog_slope(&x, &y);
    let p_conj = prof.p / (prof.p - 1.0);
    Ok(RemainderStudy { samples, slope, predicted_slope: 1.0 + prof.n as f64 / p_conj })
}

pub fn remainder_csv(study: &RemainderStudy) -> String {
    let mut s = String::from("eps,norm,log_eps,log_norm\n");
    for r in &study.samples {
        s.push_str(&format!("{:.6e},{:.12e},{:.12e},{:.12e}\n", r.eps, r.norm, r.eps.ln(), r.norm.ln()));
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub eps: f64,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub min_u: f64,
    pub peak_node: usize,
    pub peak_value: f64,
    pub peak_point: [f64; 2],
    pub foot_point: [f64; 2],
    pub foot_param: f64,
    /// Distance from the foot point to the nearest stable critical point
    /// of H (None on constant-curvature boundaries).
    pub distance_to_critical: Option<f64>,
    pub energy: f64,
    /// |J_ε(u_ε) − J_ε(W_{ε,ξ_peak})| / ε, filled in by continuation.
    pub energy_gap: Option<f64>,
}

/// J_ε(u) = ε^{-2} ∫ ½ε²|∇u|² + ½u² − (u⁺)^p/p.
pub fn discrete_energy(d: &DiscreteDomain, u: &[f64], eps: f64, p: f64) -> f64 {
    let ku = d.stiffness.mul(u);
    let grad = dot(&ku, u);
    let pot: f64 = u.iter().zip(&d.mass).map(|(v, m)| m * (0.5 * v * v - pos_pow(*v, p) / p)).sum();
    (0.5 * eps * eps * grad + pot) / (eps * eps)
}

fn residual_vec(d: &DiscreteDomain, u: &[f64], eps: f64, p: f64) -> Vec<f64> {
    let ku = d.stiffness.mul(u);
    (0..u.len()).map(|i| eps * eps * ku[i] + d.mass[i] * (u[i] - pos_pow(u[i], p - 1.0))).collect()
}

/// Strong-form residual ‖M^{-1} F‖_∞ and its mass-weighted 2-norm.
fn residual_norms(d: &DiscreteDomain, f: &[f64]) -> (f64, f64) {
    let mut inf: f64 = 0.0;
    let mut two = 0.0;
    for (fi, m) in f.iter().zip(&d.mass) {
        inf = inf.max((fi / m).abs());
        two += fi * fi / m;
    }
    (inf, two.sqrt())
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Bound on the spike translation per step, in units of ε (None: plain
    /// damped Newton).
    pub translation_cap: Option<f64>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-9, max_iter: 50, translation_cap: Some(0.25) }
    }
}

/// Damped Newton for F(u) = ε²Ku + M(u − (u⁺)^{p−1}).
pub fn newton_solve(d: &DiscreteDomain, eps: f64, p: f64, u0: &[f64], opts: NewtonOptions) -> Result<(DiscreteField, SolveReport)> {
    if u0.len() != d.len() {
        return Err(Error::DimensionMismatch { expected: d.len(), got: u0.len() });
    }
    let mut u = u0.to_vec();
    let mut f = residual_vec(d, &u, eps, p);
    let (mut res, mut res2) = residual_norms(d, &f);
    let mut it = 0;
    while res >= opts.tol {
        if it >= opts.max_iter {
            return Err(Error::NotConverged(format!("Newton stopped at residual {res:e} after {it} iterations")));
        }
        it += 1;
        let dfu: Vec<f64> = u.iter().zip(&d.mass).map(|(v, m)| m * (1.0 - (p - 1.0) * pos_pow(*v, p - 2.0))).collect();
        let jac = d.stiffness.scaled_plus_diag(eps * eps, &dfu);
        let lu = jac.lu()?;
        let minus_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let mut delta = lu.solve(&minus_f);
        if let Some(cap) = opts.translation_cap {
            safeguard_translation(d, &u, &lu, &mut delta, cap * eps);
        }
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a + step * b).collect();
            let ft = residual_vec(d, &trial, eps, p);
            let (ri, r2) = residual_norms(d, &ft);
            if r2 <= (1.0 - 1e-4 * step) * res2 || (r2 < 1e-13 && ri < opts.tol) {
                u = trial;
                f = ft;
                res = ri;
                res2 = r2;
                break;
            }
            step *= 0.5;
            if step < 1e-9 {
                return Err(Error::Diverged(format!("line search exhausted at residual {res:e}")));
            }
        }
    }
    let sup = u.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if sup < 1e-6 {
        return Err(Error::ConvergedToTrivial);
    }
    // One fixed-point step u ← i*(f(u)): the M-matrix inverse is positive,
    // which removes round-off sign changes in the exponentially small tail.
    let fu: Vec<f64> = u.iter().map(|v| pos_pow(*v, p - 1.0)).collect();
    u = IStar::new(d, eps)?.apply(&fu);
    let f = residual_vec(d, &u, eps, p);
    let (res, _) = residual_norms(d, &f);
    let report = make_report(d, &u, eps, p, it, res, res < opts.tol.max(1e-8));
    Ok((u, report))
}

/// Nodal gradient of a P1 field (area-weighted average over the incident
/// triangles), projected on a fixed direction.
fn directional_derivative(d: &DiscreteDomain, u: &[f64], dir: [f64; 2]) -> Vec<f64> {
    let mut acc = vec![0.0; d.len()];
    let mut wsum = vec![0.0; d.len()];
    for tri in &d.triangles {
        let p: Vec<[f64; 2]> = tri.iter().map(|&i| d.nodes[i]).collect();
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let (du1, du2) = (u[tri[1]] - u[tri[0]], u[tri[2]] - u[tri[0]]);
        let gx = (du1 * (p[2][1] - p[0][1]) - du2 * (p[1][1] - p[0][1])) / det;
        let gy = (du2 * (p[1][0] - p[0][0]) - du1 * (p[2][0] - p[0][0])) / det;
        let area = 0.5 * det.abs();
        let g = gx * dir[0] + gy * dir[1];
        for &i in tri {
            acc[i] += area * g;
            wsum[i] += area;
        }
    }
    acc.iter().zip(&wsum).map(|(a, w)| a / w).collect()
}

/// Bordered trust-region correction of a Newton step in the translation
/// mode.
///
/// Z = ∂_τ u along the boundary tangent at the peak. A linearized shift
/// a·Z only translates the spike faithfully for |a| well below ε, so the
/// Newton step's Z-coefficient is clipped to ±`cap` and the remaining
/// components solve J δ = −F + c MZ. Near a solution the clip is inactive.
fn safeguard_translation(d: &DiscreteDomain, u: &[f64], lu: &Factor, delta: &mut [f64], cap: f64) {
    let (peak, _) = u.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let pp = d.nodes[peak];
    let (foot, _) = d.manifold.closest_point(&V3::new(pp[0], pp[1], 0.0));
    let tangent = [foot.frame[0][0], foot.frame[0][1]];
    let z = directional_derivative(d, u, tangent);
    let mz: Vec<f64> = z.iter().zip(&d.mass).map(|(a, m)| a * m).collect();
    let zz = dot(&mz, &z);
    if !(zz > 0.0) {
        return;
    }
    let a_newton = dot(&mz, delta) / zz;
    let a = a_newton.clamp(-cap, cap);
    if a == a_newton {
        return;
    }
    let g = lu.solve(&mz);
    let bg = dot(&mz, &g);
    if bg == 0.0 {
        return;
    }
    let c = (a * zz - a_newton * zz) / bg;
    for (di, gi) in delta.iter_mut().zip(&g) {
        *di += c * gi;
    }
}

fn make_report(d: &DiscreteDomain, u: &[f64], eps: f64, p: f64, iterations: usize, residual: f64, converged: bool) -> SolveReport {
    let (peak_node, peak_value) = u.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, v)| if *v > acc.1 { (i, *v) } else { acc });
    let min_u = u.iter().copied().fold(f64::INFINITY, f64::min);
    let pp = d.nodes[peak_node];
    let (foot, _) = d.manifold.closest_point(&V3::new(pp[0], pp[1], 0.0));
    let distance_to_critical = find_critical_points(&d.manifold, 512).ok().and_then(|pts| {
        pts.iter()
            .filter(|c| c.stable)
            .map(|c| ((c.location[0] - foot.x[0]).powi(2) + (c.location[1] - foot.x[1]).powi(2)).sqrt())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    });
    SolveReport {
        eps,
        converged,
        iterations,
        residual,
        min_u,
        peak_node,
        peak_value,
        peak_point: pp,
        foot_point: [foot.x[0], foot.x[1]],
        foot_param: foot.param[0],
        distance_to_critical,
        energy: discrete_energy(d, u, eps, p),
        energy_gap: None,
    }
}

/// Local minimizer in t of the discrete energy J_{ε,h}(W_{ε,ξ(t)}) of the
/// sampled ansatz, reached downhill from `t0` (the discrete analogue of a
/// critical point of the reduced energy; maxima of H are minima of J).
pub fn localize_peak(d: &DiscreteDomain, prof: &GroundStateProfile, eps: f64, t0: f64, r_cut: f64) -> Result<f64> {
    let m = &d.manifold;
    let energy = |t: f64| -> Result<f64> {
        let a = PeakAnsatz::new(m, prof, eps, m.curve_point(t), r_cut)?;
        Ok(discrete_energy(d, &d.sample_ansatz(&a), eps, prof.p))
    };
    let s0 = m.arclength(t0);
    let at = |s: f64| m.param_at_arclength(s);
    let f0 = energy(t0)?;
    let mut step = 0.25 * eps;
    let (fp, fm) = (energy(at(s0 + step))?, energy(at(s0 - step))?);
    if f0 <= fp && f0 <= fm {
        return golden(&energy, &at, s0 - step, s0 + step, d.h_mesh * 1e-2);
    }
    let dir = if fp < fm { 1.0 } else { -1.0 };
    let (mut a, mut b, mut fb) = (s0, s0 + dir * step, fp.min(fm));
    let limit = 0.5 * m.perimeter();
    loop {
        step *= 1.6;
        if step > limit {
            return Err(Error::NotConverged("no energy minimum found along the boundary".into()));
        }
        let c = b + dir * step;
        let fc = energy(at(c))?;
        if fc >= fb {
            let (lo, hi) = if dir > 0.0 { (a, c) } else { (c, a) };
            return golden(&energy, &at, lo, hi, d.h_mesh * 1e-2);
        }
        a = b;
        b = c;
        fb = fc;
    }
}

fn golden<E: Fn(f64) -> Result<f64>, A: Fn(f64) -> f64>(energy: &E, at: &A, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = energy(at(x1))?;
    let mut f2 = energy(at(x2))?;
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = energy(at(x1))?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = energy(at(x2))?;
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationResult {
    pub reports: Vec<SolveReport>,
    pub failure: Option<String>,
}

/// Solve along a descending ε list, starting from W_{ε₀,ξ} and warm
/// starting each stage from the previous solution. With `localize`, the
/// first seed is moved downhill in the ansatz energy before Newton starts.
pub fn continuation(
    d: &DiscreteDomain,
    prof: &GroundStateProfile,
    eps_list: &[f64],
    xi_param: f64,
    r_cut: f64,
    localize: bool,
    opts: NewtonOptions,
) -> Result<(ContinuationResult, Vec<DiscreteField>)> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameters("eps list must be non-empty and strictly descending".into()));
    }
    let m = &d.manifold;
    let t0 = if localize { localize_peak(d, prof, eps_list[0], xi_param, r_cut)? } else { xi_param };
    let a0 = PeakAnsatz::new(m, prof, eps_list[0], m.curve_point(t0), r_cut)?;
    let mut u = d.sample_ansatz(&a0);
    let mut reports = Vec::new();
    let mut fields = Vec::new();
    for &eps in eps_list {
        match newton_solve(d, eps, prof.p, &u, opts) {
            Ok((sol, mut rep)) => {
                let w = PeakAnsatz::new(m, prof, eps, m.curve_point(rep.foot_param), r_cut).map(|a| d.sample_ansatz(&a))?;
                let jw = discrete_energy(d, &w, eps, prof.p);
                rep.energy_gap = Some((rep.energy - jw).abs() / eps);
                reports.push(rep);
                u = sol.clone();
                fields.push(sol);
            }
            Err(e) => {
                return Ok((ContinuationResult { reports, failure: Some(format!("eps = {eps}: {e}")) }, fields));
            }
        }
    }
    Ok((ContinuationResult { reports, failure: None }, fields))
}

pub fn solution_csv(d: &DiscreteDomain, u: &[f64]) -> String {
    let mut s = String::from("x,y,u\n");
    for (p, v) in d.nodes.iter().zip(u) {
        s.push_str(&format!("{:.10},{:.10},{:.12e}\n", p[0], p[1], v));
    }
    s
}
