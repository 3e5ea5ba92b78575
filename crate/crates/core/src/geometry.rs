//! Flat domains with smooth boundary: planar ellipses (disk included) and
//! solid spheroids (ball included). Fermi charts, curvature, metric checks
//! and critical points of the boundary mean curvature.
//!
//! Sign convention: the second fundamental form is taken against the
//! inward normal, so the unit disk and unit ball have H = +1 and the
//! volume element in Fermi coordinates is 1 - (n-1) H y_n + O(|y|²).
//! Orientation -1 flips the normal and hence the sign of H.

use nalgebra::{DMatrix, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bisect, gauss_legendre, loglog_slope, richardson_diff, richardson_diff2};

pub type V3 = Vector3<f64>;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

fn default_orientation() -> i8 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Disk {
        radius: f64,
        #[serde(default = "default_orientation")]
        orientation: i8,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default = "default_orientation")]
        orientation: i8,
    },
    Ball {
        radius: f64,
        #[serde(default = "default_orientation")]
        orientation: i8,
    },
    /// Solid of revolution about the z axis with equatorial semi-axis `a`
    /// and polar semi-axis `c`.
    Spheroid {
        a: f64,
        c: f64,
        #[serde(default = "default_orientation")]
        orientation: i8,
    },
}

impl ManifoldSpec {
    /// Parse `disk:1`, `ellipse:2,1`, `ball:1`, `spheroid:1.5,1`, with an
    /// optional `:-1` suffix for reversed orientation.
    pub fn parse(s: &str) -> Result<ManifoldSpec> {
        let bad = || Error::Config(format!("cannot parse manifold '{s}'"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?.trim();
        let nums: Vec<f64> = match parts.next() {
            Some(t) => t.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?,
            None => vec![],
        };
        let orientation = match parts.next() {
            Some(o) => o.trim().parse::<i8>().map_err(|_| bad())?,
            None => 1,
        };
        let spec = match (kind, nums.as_slice()) {
            ("disk", []) => ManifoldSpec::Disk { radius: 1.0, orientation },
            ("disk", [r]) => ManifoldSpec::Disk { radius: *r, orientation },
            ("ellipse", [a, b]) => ManifoldSpec::Ellipse { a: *a, b: *b, orientation },
            ("ball", []) => ManifoldSpec::Ball { radius: 1.0, orientation },
            ("ball", [r]) => ManifoldSpec::Ball { radius: *r, orientation },
            ("spheroid", [a, c]) => ManifoldSpec::Spheroid { a: *a, c: *c, orientation },
            _ => return Err(bad()),
        };
        Ok(spec)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ManifoldSpec::Disk { .. } => "disk",
            ManifoldSpec::Ellipse { .. } => "ellipse",
            ManifoldSpec::Ball { .. } => "ball",
            ManifoldSpec::Spheroid { .. } => "spheroid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// (a cos t, b sin t)
    Curve { a: f64, b: f64 },
    /// (a sin φ cos θ, a sin φ sin θ, c cos φ)
    Surface { a: f64, c: f64 },
}

/// A point of ∂M with its inward normal and an orthonormal tangent frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: V3,
    pub normal: V3,
    /// Unit tangents; only `frame[0]` is meaningful when n = 2.
    pub frame: [V3; 2],
    /// Curve parameter t (n = 2) or (θ, φ) (n = 3).
    pub param: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct BoundaryManifold {
    spec: ManifoldSpec,
    shape: Shape,
    sigma: f64,
    /// Cumulative arc length at panel ends for planar curves.
    arc_table: Vec<f64>,
    gl: Vec<(f64, f64)>,
}

const ARC_PANELS: usize = 1024;

impl BoundaryManifold {
    pub fn new(spec: ManifoldSpec) -> Result<BoundaryManifold> {
        let (shape, o) = match spec {
            ManifoldSpec::Disk { radius, orientation } => (Shape::Curve { a: radius, b: radius }, orientation),
            ManifoldSpec::Ellipse { a, b, orientation } => (Shape::Curve { a, b }, orientation),
            ManifoldSpec::Ball { radius, orientation } => (Shape::Surface { a: radius, c: radius }, orientation),
            ManifoldSpec::Spheroid { a, c, orientation } => (Shape::Surface { a, c }, orientation),
        };
        let (p, q) = match shape {
            Shape::Curve { a, b } => (a, b),
            Shape::Surface { a, c } => (a, c),
        };
        if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidParameters(format!("semi-axes must be positive, got {p}, {q}")));
        }
        if o != 1 && o != -1 {
            return Err(Error::InvalidParameters(format!("orientation must be 1 or -1, got {o}")));
        }
        let mut m = BoundaryManifold { spec, shape, sigma: o as f64, arc_table: vec![], gl: gauss_legendre(10) };
        if let Shape::Curve { .. } = shape {
            let mut table = vec![0.0; ARC_PANELS + 1];
            let w = TWO_PI / ARC_PANELS as f64;
            for k in 0..ARC_PANELS {
                let lo = k as f64 * w;
                table[k + 1] = table[k] + m.speed_integral(lo, lo + w);
            }
            m.arc_table = table;
        }
        Ok(m)
    }

    pub fn from_str_spec(s: &str) -> Result<BoundaryManifold> {
        BoundaryManifold::new(ManifoldSpec::parse(s)?)
    }

    pub fn spec(&self) -> ManifoldSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        match self.shape {
            Shape::Curve { .. } => 2,
            Shape::Surface { .. } => 3,
        }
    }

    pub fn orientation(&self) -> f64 {
        self.sigma
    }

    /// Smallest radius of curvature of ∂M; equals the reach for these
    /// convex shapes.
    pub fn reach(&self) -> f64 {
        match self.shape {
            Shape::Curve { a, b } => (b * b / a).min(a * a / b),
            Shape::Surface { a, c } => (c * c / a).min(a * a / c).min(a),
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self.shape {
            Shape::Curve { .. } => 0.5 * self.perimeter(),
            Shape::Surface { .. } => std::f64::consts::PI * self.reach(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.arc_table.last().copied().unwrap_or(f64::NAN)
    }

    /// Enclosed area (n = 2) or volume (n = 3).
    pub fn measure(&self) -> f64 {
        match self.shape {
            Shape::Curve { a, b } => std::f64::consts::PI * a * b,
            Shape::Surface { a, c } => 4.0 / 3.0 * std::f64::consts::PI * a * a * c,
        }
    }

    pub fn contains(&self, x: &V3) -> bool {
        let f = match self.shape {
            Shape::Curve { a, b } => (x[0] / a).powi(2) + (x[1] / b).powi(2) - 1.0,
            Shape::Surface { a, c } => (x[0] * x[0] + x[1] * x[1]) / (a * a) + (x[2] / c).powi(2) - 1.0,
        };
        if self.sigma > 0.0 {
            f < 0.0
        } else {
            f > 0.0
        }
    }

    // ---------- planar curves ----------

    fn curve_ab(&self) -> (f64, f64) {
        match self.shape {
            Shape::Curve { a, b } => (a, b),
            Shape::Surface { .. } => panic!("planar operation on a surface"),
        }
    }

    fn speed(&self, t: f64) -> f64 {
        let (a, b) = self.curve_ab();
        (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt()
    }

    fn speed_integral(&self, lo: f64, hi: f64) -> f64 {
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        self.gl.iter().map(|&(x, w)| r * w * self.speed(c + r * x)).sum()
    }

    /// Arc length from t = 0 to t, for any real t.
    pub fn arclength(&self, t: f64) -> f64 {
        let p = self.perimeter();
        let turns = (t / TWO_PI).floor();
        let tr = t - turns * TWO_PI;
        let w = TWO_PI / ARC_PANELS as f64;
        let k = ((tr / w).floor() as usize).min(ARC_PANELS - 1);
        turns * p + self.arc_table[k] + self.speed_integral(k as f64 * w, tr)
    }

    /// Inverse of `arclength`.
    pub fn param_at_arclength(&self, s: f64) -> f64 {
        let p = self.perimeter();
        let turns = (s / p).floor();
        let sr = s - turns * p;
        let k = match self.arc_table.binary_search_by(|v| v.partial_cmp(&sr).unwrap()) {
            Ok(k) => k.min(ARC_PANELS - 1),
            Err(k) => k.saturating_sub(1).min(ARC_PANELS - 1),
        };
        let w = TWO_PI / ARC_PANELS as f64;
        let frac = (sr - self.arc_table[k]) / (self.arc_table[k + 1] - self.arc_table[k]);
        let mut t = (k as f64 + frac) * w;
        for _ in 0..8 {
            let f = self.arclength(t) - sr;
            let dt = f / self.speed(t);
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        t + turns * TWO_PI
    }

    /// Boundary point at curve parameter t.
    pub fn curve_point(&self, t: f64) -> BoundaryPoint {
        let (a, b) = self.curve_ab();
        let x = V3::new(a * t.cos(), b * t.sin(), 0.0);
        let d = V3::new(-a * t.sin(), b * t.cos(), 0.0);
        let tang = d / d.norm();
        let normal = self.sigma * V3::new(-tang[1], tang[0], 0.0);
        BoundaryPoint { x, normal, frame: [tang, V3::zeros()], param: [t.rem_euclid(TWO_PI), 0.0] }
    }

    pub fn point_at_arclength(&self, s: f64) -> BoundaryPoint {
        self.curve_point(self.param_at_arclength(s))
    }

    /// Signed curvature against the inward normal, from γ'' projected on ν.
    pub fn curve_curvature(&self, t: f64) -> f64 {
        let (a, b) = self.curve_ab();
        let d1 = V3::new(-a * t.sin(), b * t.cos(), 0.0);
        let d2 = V3::new(-a * t.cos(), -b * t.sin(), 0.0);
        let sp2 = d1.norm_squared();
        let tang = d1 / sp2.sqrt();
        let normal = self.sigma * V3::new(-tang[1], tang[0], 0.0);
        d2.dot(&normal) / sp2
    }

    /// dκ/ds in closed form: κ = σ ab q^{-3/2}, q = a² sin² t + b² cos² t.
    pub fn curve_curvature_slope(&self, t: f64) -> f64 {
        let (a, b) = self.curve_ab();
        let q = a * a * t.sin().powi(2) + b * b * t.cos().powi(2);
        let dq = 2.0 * (a * a - b * b) * t.sin() * t.cos();
        -1.5 * self.sigma * a * b * q.powf(-2.5) * dq / q.sqrt()
    }

    /// Curvature as a function of arc length.
    pub fn curvature_at_arclength(&self, s: f64) -> f64 {
        self.curve_curvature(self.param_at_arclength(s))
    }

    // ---------- surfaces ----------

    fn surface_ac(&self) -> (f64, f64) {
        match self.shape {
            Shape::Surface { a, c } => (a, c),
            Shape::Curve { .. } => panic!("surface operation on a curve"),
        }
    }

    fn implicit_grad(&self, x: &V3) -> V3 {
        let (a, c) = self.surface_ac();
        V3::new(2.0 * x[0] / (a * a), 2.0 * x[1] / (a * a), 2.0 * x[2] / (c * c))
    }

    fn implicit_hess(&self) -> Matrix3<f64> {
        let (a, c) = self.surface_ac();
        Matrix3::from_diagonal(&V3::new(2.0 / (a * a), 2.0 / (a * a), 2.0 / (c * c)))
    }

    /// Surface point at (θ, φ) with the frame (azimuthal, meridian).
    pub fn surface_point(&self, theta: f64, phi: f64) -> BoundaryPoint {
        let (a, c) = self.surface_ac();
        let x = V3::new(a * phi.sin() * theta.cos(), a * phi.sin() * theta.sin(), c * phi.cos());
        self.surface_frame_at(x, [theta, phi])
    }

    fn surface_frame_at(&self, x: V3, param: [f64; 2]) -> BoundaryPoint {
        let g = self.implicit_grad(&x);
        let normal = -self.sigma * g / g.norm();
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let e1 = if rho > 1e-12 * self.reach() {
            V3::new(-x[1] / rho, x[0] / rho, 0.0)
        } else {
            V3::new(0.0, 1.0, 0.0)
        };
        let e1 = (e1 - normal * normal.dot(&e1)).normalize();
        let e2 = normal.cross(&e1).normalize();
        BoundaryPoint { x, normal, frame: [e1, e2], param }
    }

    fn surface_param(&self, x: &V3) -> [f64; 2] {
        let (a, c) = self.surface_ac();
        let theta = x[1].atan2(x[0]);
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let phi = (rho / a).atan2(x[2] / c);
        [theta, phi]
    }

    fn project_to_surface(&self, x: V3) -> V3 {
        let (a, c) = self.surface_ac();
        let mut y = x;
        for _ in 0..3 {
            let f = (y[0] * y[0] + y[1] * y[1]) / (a * a) + (y[2] / c).powi(2) - 1.0;
            let g = self.implicit_grad(&y);
            y -= g * (f / g.norm_squared());
        }
        y
    }

    /// Geodesic of ∂M from q with initial velocity v (|v| = length),
    /// transporting the tangent frame in parallel. Fixed RK4 steps.
    fn surface_geodesic(&self, q: &BoundaryPoint, v: V3) -> BoundaryPoint {
        let len = v.norm();
        if len == 0.0 {
            return *q;
        }
        let base = self.reach();
        let steps_for = |l: f64| (l / (1e-3 * base)).ceil().max(1.0) as usize;
        let steps = steps_for(base).max(steps_for(len));
        let hess = self.implicit_hess();
        let rhs = |y: &[V3; 4]| -> [V3; 4] {
            let g = self.implicit_grad(&y[0]);
            let g2 = g.norm_squared();
            let hv = hess * y[1];
            let acc = -g * (y[1].dot(&hv) / g2);
            let t1 = -g * (y[2].dot(&hv) / g2);
            let t2 = -g * (y[3].dot(&hv) / g2);
            [y[1], acc, t1, t2]
        };
        let h = 1.0 / steps as f64;
        let mut y = [q.x, v, q.frame[0], q.frame[1]];
        let comb = |a: &[V3; 4], k: &[V3; 4], s: f64| [a[0] + k[0] * s, a[1] + k[1] * s, a[2] + k[2] * s, a[3] + k[3] * s];
        for _ in 0..steps {
            let k1 = rhs(&y);
            let k2 = rhs(&comb(&y, &k1, 0.5 * h));
            let k3 = rhs(&comb(&y, &k2, 0.5 * h));
            let k4 = rhs(&comb(&y, &k3, h));
            for i in 0..4 {
                y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
            }
        }
        let x = self.project_to_surface(y[0]);
        let g = self.implicit_grad(&x);
        let normal = -self.sigma * g / g.norm();
        let mut e1 = y[2] - normal * normal.dot(&y[2]);
        e1.normalize_mut();
        let mut e2 = y[3] - normal * normal.dot(&y[3]) - e1 * e1.dot(&y[3]);
        e2.normalize_mut();
        BoundaryPoint { x, normal, frame: [e1, e2], param: self.surface_param(&x) }
    }

    // ---------- common interface ----------

    /// Default boundary point from a parameter: [t] for curves, [θ, φ] for
    /// surfaces.
    pub fn point(&self, param: &[f64]) -> BoundaryPoint {
        match self.shape {
            Shape::Curve { .. } => self.curve_point(param[0]),
            Shape::Surface { .. } => self.surface_point(param[0], *param.get(1).unwrap_or(&0.0)),
        }
    }

    /// exp^∂_q(y) with y in the frame of q.
    pub fn exp(&self, q: &BoundaryPoint, y: &[f64]) -> Result<BoundaryPoint> {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let inj = self.injectivity_radius();
        if norm > inj {
            return Err(Error::OutOfChart { norm, radius: inj });
        }
        Ok(self.exp_unchecked(q, y))
    }

    fn exp_unchecked(&self, q: &BoundaryPoint, y: &[f64]) -> BoundaryPoint {
        match self.shape {
            Shape::Curve { .. } => {
                let s = self.arclength(q.param[0]) + y[0];
                self.point_at_arclength(s)
            }
            Shape::Surface { .. } => {
                let v = q.frame[0] * y[0] + q.frame[1] * y[1];
                self.surface_geodesic(q, v)
            }
        }
    }

    /// (exp^∂_q)^{-1}(x) in the frame of q.
    pub fn log(&self, q: &BoundaryPoint, x: &V3) -> Result<Vec<f64>> {
        match self.shape {
            Shape::Curve { .. } => {
                let (foot, _) = self.closest_point(x);
                let p = self.perimeter();
                let mut ds = self.arclength(foot.param[0]) - self.arclength(q.param[0]);
                ds -= (ds / p).round() * p;
                Ok(vec![ds])
            }
            Shape::Surface { .. } => {
                let d = x - q.x;
                let mut v = [d.dot(&q.frame[0]), d.dot(&q.frame[1])];
                for _ in 0..30 {
                    let p0 = self.surface_geodesic(q, q.frame[0] * v[0] + q.frame[1] * v[1]);
                    let r = x - p0.x;
                    let res = [r.dot(&p0.frame[0]), r.dot(&p0.frame[1])];
                    if res[0].abs() + res[1].abs() < 1e-14 * self.reach() {
                        break;
                    }
                    // Jacobian of the residual by central differences.
                    let hstep = 1e-6 * self.reach();
                    let mut jac = [[0.0; 2]; 2];
                    for j in 0..2 {
                        let mut vp = v;
                        let mut vm = v;
                        vp[j] += hstep;
                        vm[j] -= hstep;
                        let pp = self.surface_geodesic(q, q.frame[0] * vp[0] + q.frame[1] * vp[1]).x;
                        let pm = self.surface_geodesic(q, q.frame[0] * vm[0] + q.frame[1] * vm[1]).x;
                        let dp = (pp - pm) / (2.0 * hstep);
                        jac[0][j] = dp.dot(&p0.frame[0]);
                        jac[1][j] = dp.dot(&p0.frame[1]);
                    }
                    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                    if det.abs() < 1e-14 {
                        return Err(Error::NotConverged("singular log-map Jacobian".into()));
                    }
                    v[0] += (jac[1][1] * res[0] - jac[0][1] * res[1]) / det;
                    v[1] += (-jac[1][0] * res[0] + jac[0][0] * res[1]) / det;
                }
                Ok(v.to_vec())
            }
        }
    }

    /// Closest boundary point and signed distance (positive inside for
    /// orientation +1).
    pub fn closest_point(&self, x: &V3) -> (BoundaryPoint, f64) {
        match self.shape {
            Shape::Curve { a, b } => {
                let t = ellipse_closest(a, b, x[0], x[1]);
                let q = self.curve_point(t);
                let d = (x - q.x).dot(&q.normal);
                (q, d)
            }
            Shape::Surface { a, c } => {
                let theta = x[1].atan2(x[0]);
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                // Meridian ellipse (a cos t, c sin t) in the (ρ, z) plane.
                let t = ellipse_closest(a, c, rho, x[2]);
                let phi = std::f64::consts::FRAC_PI_2 - t;
                let q = self.surface_point(theta, phi);
                let d = (x - q.x).dot(&q.normal);
                (q, d)
            }
        }
    }

    /// Mean curvature at a boundary point.
    pub fn mean_curvature_at(&self, q: &BoundaryPoint) -> f64 {
        match self.shape {
            Shape::Curve { .. } => self.curve_curvature(q.param[0]),
            Shape::Surface { .. } => {
                let h = self.second_form_matrix(q);
                0.5 * (h[0][0] + h[1][1])
            }
        }
    }

    fn second_form_matrix(&self, q: &BoundaryPoint) -> Vec<Vec<f64>> {
        match self.shape {
            Shape::Curve { .. } => vec![vec![self.curve_curvature(q.param[0])]],
            Shape::Surface { .. } => {
                let g = self.implicit_grad(&q.x);
                let hess = self.implicit_hess();
                let gn = g.norm();
                let mut h = vec![vec![0.0; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        h[i][j] = self.sigma * q.frame[i].dot(&(hess * q.frame[j])) / gn;
                    }
                }
                h
            }
        }
    }

    /// Tangential gradient of H by centered differences along boundary
    /// geodesics.
    pub fn mean_curvature_gradient(&self, q: &BoundaryPoint) -> Vec<f64> {
        let d = self.n() - 1;
        let step = 1e-2 * self.reach();
        (0..d)
            .map(|i| {
                let f = |s: f64| {
                    let mut y = vec![0.0; d];
                    y[i] = s;
                    self.mean_curvature_at(&self.exp_unchecked(q, &y))
                };
                richardson_diff(f, 0.0, step).0
            })
            .collect()
    }
}

/// Parameter of the closest point on (a cos t, b sin t) to (x, y).
fn ellipse_closest(a: f64, b: f64, x: f64, y: f64) -> f64 {
    let dist2 = |t: f64| (a * t.cos() - x).powi(2) + (b * t.sin() - y).powi(2);
    let samples = 128;
    let mut best = 0.0;
    let mut best_d = f64::INFINITY;
    for k in 0..samples {
        let t = TWO_PI * k as f64 / samples as f64;
        let d = dist2(t);
        if d < best_d {
            best_d = d;
            best = t;
        }
    }
    let g = |t: f64| (b * b - a * a) * t.sin() * t.cos() + a * x * t.sin() - b * y * t.cos();
    let dg = |t: f64| (b * b - a * a) * (2.0 * t).cos() + a * x * t.cos() + b * y * t.sin();
    let mut t = best;
    let w = TWO_PI / samples as f64;
    for _ in 0..50 {
        let d = dg(t);
        let step = if d > 0.0 { g(t) / d } else { 0.0 };
        if d <= 0.0 || step.abs() > w {
            // Fall back to bisection on the bracketing interval.
            let lo = best - w;
            let hi = best + w;
            if g(lo) * g(hi) < 0.0 {
                t = bisect(g, lo, hi, 1e-15);
            }
            break;
        }
        t -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    t.rem_euclid(TWO_PI)
}

pub fn boundary_exponential(m: &BoundaryManifold, q: &BoundaryPoint, y: &[f64]) -> Result<BoundaryPoint> {
    m.exp(q, y)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "H")]
    pub mean: f64,
    #[serde(rename = "dH")]
    pub grad: Vec<f64>,
}

pub fn second_fundamental_form(m: &BoundaryManifold, q: &BoundaryPoint) -> CurvatureReport {
    let h = m.second_form_matrix(q);
    let d = h.len();
    let mean = (0..d).map(|i| h[i][i]).sum::<f64>() / d as f64;
    CurvatureReport { h, mean, grad: m.mean_curvature_gradient(q) }
}

/// Fermi chart at a boundary point.
#[derive(Debug, Clone)]
pub struct FermiChart<'a> {
    pub manifold: &'a BoundaryManifold,
    pub base: BoundaryPoint,
    pub r_chart: f64,
    orient: f64,
}

#[derive(Debug, Clone)]
pub struct MetricSample {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub sqrt_det: f64,
}

impl<'a> FermiChart<'a> {
    pub fn new(manifold: &'a BoundaryManifold, base: BoundaryPoint) -> FermiChart<'a> {
        let orient = match manifold.n() {
            2 => {
                let t = base.frame[0];
                (t[0] * base.normal[1] - t[1] * base.normal[0]).signum()
            }
            _ => base.frame[0].cross(&base.frame[1]).dot(&base.normal).signum(),
        };
        FermiChart { manifold, base, r_chart: manifold.reach(), orient }
    }

    pub fn n(&self) -> usize {
        self.manifold.n()
    }

    /// Φ(ȳ, y_n) = exp^∂_ξ(ȳ) + y_n ν(exp^∂_ξ(ȳ)).
    pub fn fermi_map(&self, ybar: &[f64], yn: f64) -> Result<V3> {
        let norm = (ybar.iter().map(|v| v * v).sum::<f64>() + yn * yn).sqrt();
        if norm >= self.r_chart {
            return Err(Error::OutOfChart { norm, radius: self.r_chart });
        }
        Ok(self.map_unchecked(ybar, yn))
    }

    fn map_unchecked(&self, ybar: &[f64], yn: f64) -> V3 {
        let foot = self.manifold.exp_unchecked(&self.base, ybar);
        foot.x + foot.normal * yn
    }

    /// Fermi coordinates of an ambient point by closest-point projection.
    pub fn inverse(&self, x: &V3) -> Result<(Vec<f64>, f64)> {
        let (foot, d) = self.manifold.closest_point(x);
        let ybar = self.manifold.log(&self.base, &foot.x)?;
        Ok((ybar, d))
    }

    /// Jacobian of Φ by centered differences with one Richardson step; the
    /// step is ε^{1/5}-scaled, the optimum once the h² term is eliminated.
    fn jacobian(&self, ybar: &[f64], yn: f64) -> DMatrix<f64> {
        let n = self.n();
        let scale = self.r_chart;
        let h = f64::EPSILON.powf(0.2) * scale;
        let mut y = ybar.to_vec();
        y.push(yn);
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let eval = |s: f64| {
                let mut z = y.clone();
                z[j] += s;
                self.map_unchecked(&z[..n - 1], z[n - 1])
            };
            let d1 = (eval(h) - eval(-h)) / (2.0 * h);
            let d2 = (eval(0.5 * h) - eval(-0.5 * h)) / h;
            let d = (d2 * 4.0 - d1) / 3.0;
            for i in 0..n {
                jac[(i, j)] = d[i];
            }
        }
        jac
    }

    /// Pulled-back metric and its volume element.
    pub fn metric(&self, ybar: &[f64], yn: f64) -> Result<MetricSample> {
        let norm = (ybar.iter().map(|v| v * v).sum::<f64>() + yn * yn).sqrt();
        if norm >= self.r_chart {
            return Err(Error::OutOfChart { norm, radius: self.r_chart });
        }
        self.metric_unchecked(ybar, yn)
    }

    fn metric_unchecked(&self, ybar: &[f64], yn: f64) -> Result<MetricSample> {
        let jac = self.jacobian(ybar, yn);
        let det = self.orient * jac.determinant();
        if det <= 0.0 {
            return Err(Error::SingularMetric(det));
        }
        let g = jac.transpose() * &jac;
        let g_inv = g.clone().try_inverse().ok_or(Error::SingularMetric(det))?;
        Ok(MetricSample { g, g_inv, sqrt_det: det })
    }
}

pub fn fermi_map(chart: &FermiChart, ybar: &[f64], yn: f64) -> Result<V3> {
    chart.fermi_map(ybar, yn)
}

pub fn metric_in_fermi(chart: &FermiChart, ybar: &[f64], yn: f64) -> Result<MetricSample> {
    chart.metric(ybar, yn)
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricExpansionReport {
    /// max |g(0) - I|
    pub identity_at_origin: f64,
    /// Step sizes |y| used for the expansion residuals.
    pub steps: Vec<f64>,
    /// max_ij |g^{ij}(y) - δ_ij - 2 h_ij y_n| per step.
    pub g1_residuals: Vec<f64>,
    /// |√g(y) - 1 + (n-1) H y_n| per step.
    pub g3_residuals: Vec<f64>,
    pub g1_slope: f64,
    pub g3_slope: f64,
    /// max |g^{in} - δ_in| over all samples.
    pub g2_max: f64,
    /// ∂²√g/∂y_n∂y_i at 0.
    pub mixed: Vec<f64>,
    /// Tangential gradient of H used for the comparison.
    #[serde(rename = "dH")]
    pub dh: Vec<f64>,
    /// max_i |mixed_i + (n-1) dH_i|
    pub g_residual: f64,
}

pub fn verify_metric_expansion(chart: &FermiChart) -> Result<MetricExpansionReport> {
    let n = chart.n();
    let d = n - 1;
    let m = chart.manifold;
    let curv = second_fundamental_form(m, &chart.base);
    let g0 = chart.metric(&vec![0.0; d], 0.0)?;
    let identity_at_origin = (&g0.g - DMatrix::<f64>::identity(n, n)).abs().max();

    let dir: Vec<f64> = vec![1.0 / (n as f64).sqrt(); n];
    let s0 = 0.2 * chart.r_chart;
    let steps: Vec<f64> = (0..5).map(|k| s0 / 2f64.powi(k)).collect();
    let mut g1_residuals = vec![];
    let mut g3_residuals = vec![];
    let mut g2_max: f64 = 0.0;
    for &s in &steps {
        let y: Vec<f64> = dir.iter().map(|v| v * s).collect();
        let yn = y[n - 1];
        let ms = chart.metric(&y[..d], yn)?;
        let mut r1: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let delta = if i == j { 1.0 } else { 0.0 };
                r1 = r1.max((ms.g_inv[(i, j)] - delta - 2.0 * curv.h[i][j] * yn).abs());
            }
        }
        for i in 0..n {
            let delta = if i == n - 1 { 1.0 } else { 0.0 };
            g2_max = g2_max.max((ms.g_inv[(i, n - 1)] - delta).abs());
        }
        g1_residuals.push(r1);
        g3_residuals.push((ms.sqrt_det - 1.0 + d as f64 * curv.mean * yn).abs());
    }
    let g1_slope = loglog_slope(&steps, &g1_residuals);
    let g3_slope = loglog_slope(&steps, &g3_residuals);

    let delta = 0.02 * chart.r_chart;
    let mut mixed = vec![];
    for i in 0..d {
        let sq = |a: f64, b: f64| -> f64 {
            let mut y = vec![0.0; d];
            y[i] = a;
            chart.metric_unchecked(&y, b).map(|s| s.sqrt_det).unwrap_or(f64::NAN)
        };
        let cross = |h: f64| (sq(h, h) - sq(-h, h) - sq(h, -h) + sq(-h, -h)) / (4.0 * h * h);
        let c1 = cross(delta);
        let c2 = cross(0.5 * delta);
        mixed.push((4.0 * c2 - c1) / 3.0);
    }
    let g_residual = (0..d).map(|i| (mixed[i] + d as f64 * curv.grad[i]).abs()).fold(0.0, f64::max);
    Ok(MetricExpansionReport {
        identity_at_origin,
        steps,
        g1_residuals,
        g3_residuals,
        g1_slope,
        g3_slope,
        g2_max,
        mixed,
        dh: curv.grad,
        g_residual,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransitionReport {
    /// max |Ẽ(0, η̄) - η̄|
    pub e_at_zero_y: f64,
    /// max |∂Ẽ_k/∂η_j(0, η̄) - δ_jk|
    pub d_eta: f64,
    /// max |∂Ẽ_k/∂y_j(0, 0) + δ_jk|
    pub d_y: f64,
    /// Step sizes for the mixed derivative.
    pub mixed_steps: Vec<f64>,
    /// max_{jhk} |∂²Ẽ_k/∂y_j∂η_h(0, 0)| per step.
    pub mixed: Vec<f64>,
    /// Fitted slope of the mixed derivative against the step (NaN when it
    /// sits at round-off).
    pub mixed_slope: f64,
    /// max |H̃_n - η_n| and |∂H̃_k/∂η_n| over samples.
    pub h_normal: f64,
}

/// Numerical checks of the chart-transition map
/// Ẽ(y, η̄) = (exp^∂_{ξ(y)})^{-1}(exp^∂_{ξ0} η̄), ξ(y) = exp^∂_{ξ0}(y).
pub fn transition_derivatives(m: &BoundaryManifold, xi0: &BoundaryPoint) -> Result<TransitionReport> {
    let d = m.n() - 1;
    let scale = m.reach();
    let e_tilde = |y: &[f64], eta: &[f64]| -> Result<Vec<f64>> {
        let xi = m.exp_unchecked(xi0, y);
        let x = m.exp_unchecked(xi0, eta);
        m.log(&xi, &x.x)
    };
    let zero = vec![0.0; d];
    let samples: Vec<Vec<f64>> = (0..3)
        .map(|k| (0..d).map(|j| 0.1 * scale * ((k + 1) as f64) * if j == 0 { 1.0 } else { -0.5 }).collect())
        .chain(std::iter::once(zero.clone()))
        .collect();

    let mut e_at_zero_y: f64 = 0.0;
    let mut d_eta: f64 = 0.0;
    let hd = 1e-4 * scale;
    for eta in &samples {
        let e = e_tilde(&zero, eta)?;
        for k in 0..d {
            e_at_zero_y = e_at_zero_y.max((e[k] - eta[k]).abs());
        }
        for j in 0..d {
            let mut ep = eta.clone();
            let mut em = eta.clone();
            ep[j] += hd;
            em[j] -= hd;
            let a = e_tilde(&zero, &ep)?;
            let b = e_tilde(&zero, &em)?;
            for k in 0..d {
                let delta = if j == k { 1.0 } else { 0.0 };
                d_eta = d_eta.max(((a[k] - b[k]) / (2.0 * hd) - delta).abs());
            }
        }
    }
    let mut d_y: f64 = 0.0;
    for j in 0..d {
        let mut yp = zero.clone();
        let mut ym = zero.clone();
        yp[j] = hd;
        ym[j] = -hd;
        let a = e_tilde(&yp, &zero)?;
        let b = e_tilde(&ym, &zero)?;
        for k in 0..d {
            let delta = if j == k { 1.0 } else { 0.0 };
            d_y = d_y.max(((a[k] - b[k]) / (2.0 * hd) + delta).abs());
        }
    }

    let mixed_steps: Vec<f64> = (0..4).map(|k| 0.08 * scale / 2f64.powi(k)).collect();
    let mut mixed = vec![];
    for &hstep in &mixed_steps {
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for hh in 0..d {
                let eval = |sy: f64, se: f64| -> Result<Vec<f64>> {
                    let mut y = zero.clone();
                    let mut eta = zero.clone();
                    y[j] = sy;
                    eta[hh] = se;
                    e_tilde(&y, &eta)
                };
                let pp = eval(hstep, hstep)?;
                let pm = eval(hstep, -hstep)?;
                let mp = eval(-hstep, hstep)?;
                let mm = eval(-hstep, -hstep)?;
                for k in 0..d {
                    let v = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * hstep * hstep);
                    worst = worst.max(v.abs());
                }
            }
        }
        mixed.push(worst);
    }
    let noise_floor = 1e-9;
    let mixed_slope = if mixed.iter().all(|v| *v > noise_floor) {
        loglog_slope(&mixed_steps, &mixed)
    } else {
        f64::NAN
    };

    // H̃(y, η̄, η_n): Fermi coordinates at ξ(y) of the point ψ_{ξ0}(η̄, η_n).
    let chart0 = FermiChart::new(m, *xi0);
    let mut h_normal: f64 = 0.0;
    let y = vec![0.05 * scale; d];
    let xi = m.exp_unchecked(xi0, &y);
    let chart_y = FermiChart::new(m, xi);
    for eta in &samples {
        for &eta_n in &[0.05 * scale, 0.2 * scale] {
            let x = chart0.map_unchecked(eta, eta_n);
            let (ybar, yn) = chart_y.inverse(&x)?;
            h_normal = h_normal.max((yn - eta_n).abs());
            let x2 = chart0.map_unchecked(eta, eta_n + hd);
            let (ybar2, _) = chart_y.inverse(&x2)?;
            for k in 0..d {
                h_normal = h_normal.max(((ybar2[k] - ybar[k]) / hd).abs());
            }
        }
    }
    Ok(TransitionReport { e_at_zero_y, d_eta, d_y, mixed_steps, mixed, mixed_slope, h_normal })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Max,
    Min,
    Saddle,
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub location: [f64; 3],
    /// Curve parameter t (n = 2) or polar angle φ (n = 3).
    pub param: f64,
    #[serde(rename = "H")]
    pub value: f64,
    #[serde(rename = "dH")]
    pub grad_norm: f64,
    pub kind: CriticalKind,
    pub stable: bool,
    /// False for critical circles of surfaces of revolution and for
    /// constant-curvature boundaries.
    pub isolated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LandscapeSample {
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "dH")]
    pub dh: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalScan {
    pub points: Vec<CriticalPoint>,
    pub degenerate: bool,
    pub spread: f64,
    pub landscape: Vec<LandscapeSample>,
}

impl BoundaryManifold {
    /// H and its derivative along the scan coordinate: arc length for
    /// curves, meridian arc length for surfaces. Returns (point, H, dH).
    fn scan_sample(&self, t: f64) -> (BoundaryPoint, f64, f64) {
        match self.shape {
            Shape::Curve { .. } => {
                let q = self.curve_point(t);
                let h = self.mean_curvature_at(&q);
                let dh = self.mean_curvature_gradient(&q)[0];
                (q, h, dh)
            }
            Shape::Surface { .. } => {
                let q = self.surface_point(0.0, t);
                let h = self.mean_curvature_at(&q);
                // Meridian direction is frame[1] away from the poles.
                let step = 1e-2 * self.reach();
                let f = |s: f64| self.mean_curvature_at(&self.exp_unchecked(&q, &[0.0, s]));
                let dh = richardson_diff(f, 0.0, step).0;
                (q, h, dh)
            }
        }
    }

    fn second_variation(&self, q: &BoundaryPoint) -> f64 {
        let step = 2e-2 * self.reach();
        let dir = match self.shape {
            Shape::Curve { .. } => vec![1.0],
            Shape::Surface { .. } => vec![0.0, 1.0],
        };
        let f = |s: f64| {
            let y: Vec<f64> = dir.iter().map(|v| v * s).collect();
            self.mean_curvature_at(&self.exp_unchecked(q, &y))
        };
        richardson_diff2(f, 0.0, step)
    }
}

pub fn scan_critical_points(m: &BoundaryManifold, resolution: usize) -> CriticalScan {
    let resolution = resolution.max(16);
    let (t_lo, t_hi, closed) = match m.shape {
        Shape::Curve { .. } => (0.0, TWO_PI, true),
        Shape::Surface { .. } => (0.0, std::f64::consts::PI, false),
    };
    let w = (t_hi - t_lo) / resolution as f64;
    let landscape: Vec<LandscapeSample> = (0..resolution)
        .map(|k| {
            let t = t_lo + (k as f64 + 0.5) * w;
            let (_, h, dh) = m.scan_sample(t);
            LandscapeSample { t, h, dh }
        })
        .collect();
    let hmax = landscape.iter().map(|s| s.h).fold(f64::NEG_INFINITY, f64::max);
    let hmin = landscape.iter().map(|s| s.h).fold(f64::INFINITY, f64::min);
    let spread = hmax - hmin;
    let degenerate = spread < 1e-9 * (1.0 + hmax.abs().max(hmin.abs()));
    let crit_tol = 1e-8 * (spread + 1.0);
    let mut points = vec![];
    if degenerate {
        return CriticalScan { points, degenerate, spread, landscape };
    }
    let classify = |q: &BoundaryPoint, h2_scale: f64| -> (CriticalKind, bool) {
        let d2 = m.second_variation(q);
        if d2 < -1e-6 * h2_scale {
            (CriticalKind::Max, true)
        } else if d2 > 1e-6 * h2_scale {
            (CriticalKind::Min, true)
        } else {
            (CriticalKind::Degenerate, false)
        }
    };
    let h2_scale = spread.max(1e-300) / (m.reach() * m.reach());
    let count = if closed { resolution } else { resolution - 1 };
    for k in 0..count {
        let a = &landscape[k];
        let b = &landscape[(k + 1) % resolution];
        if a.dh == 0.0 || (a.dh > 0.0) != (b.dh > 0.0) {
            let lo = a.t;
            let hi = if k + 1 == resolution { b.t + TWO_PI } else { b.t };
            let t = bisect(|t| m.scan_sample(t).2, lo, hi, 1e-13);
            let (q, h, dh) = m.scan_sample(t);
            if dh.abs() > crit_tol.max(1e-6 * spread / m.reach()) {
                continue;
            }
            let (kind, stable) = classify(&q, h2_scale);
            let isolated = matches!(m.shape, Shape::Curve { .. });
            let param = match m.shape {
                Shape::Curve { .. } => t.rem_euclid(TWO_PI),
                Shape::Surface { .. } => t,
            };
            points.push(CriticalPoint {
                location: [q.x[0], q.x[1], q.x[2]],
                param,
                value: h,
                grad_norm: dh.abs(),
                kind,
                stable,
                isolated,
            });
        }
    }
    if let Shape::Surface { .. } = m.shape {
        for phi in [0.0, std::f64::consts::PI] {
            let q = m.surface_point(0.0, phi);
            let h = m.mean_curvature_at(&q);
            let (kind, stable) = classify(&q, h2_scale);
            points.push(CriticalPoint {
                location: [q.x[0], q.x[1], q.x[2]],
                param: phi,
                value: h,
                grad_norm: 0.0,
                kind,
                stable,
                isolated: true,
            });
        }
    }
    points.sort_by(|a, b| a.param.partial_cmp(&b.param).unwrap());
    CriticalScan { points, degenerate, spread, landscape }
}

/// Critical points of H on ∂M. Constant-curvature boundaries give
/// `DegenerateLandscape`.
pub fn find_critical_points(m: &BoundaryManifold, resolution: usize) -> Result<Vec<CriticalPoint>> {
    let scan = scan_critical_points(m, resolution);
    if scan.degenerate {
        return Err(Error::DegenerateLandscape { spread: scan.spread });
    }
    Ok(scan.points)
}

pub fn landscape_csv(samples: &[LandscapeSample]) -> String {
    let mut s = String::from("t,H,dH\n");
    for x in samples {
        s.push_str(&format!("{:.12},{:.15e},{:.15e}\n", x.t, x.h, x.dh));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ellipse() -> BoundaryManifold {
        BoundaryManifold::new(ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 }).unwrap()
    }

    fn disk() -> BoundaryManifold {
        BoundaryManifold::new(ManifoldSpec::Disk { radius: 1.0, orientation: 1 }).unwrap()
    }

    fn ball() -> BoundaryManifold {
        BoundaryManifold::new(ManifoldSpec::Ball { radius: 1.0, orientation: 1 }).unwrap()
    }

    fn kappa(t: f64) -> f64 {
        2.0 / (4.0 * t.sin().powi(2) + t.cos().powi(2)).powf(1.5)
    }

    fn kappa_prime_s(t: f64) -> f64 {
        let q = 4.0 * t.sin().powi(2) + t.cos().powi(2);
        let dq = 6.0 * t.sin() * t.cos();
        -3.0 * q.powf(-2.5) * dq / q.sqrt()
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(ManifoldSpec::parse("ellipse:2,1").unwrap(), ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 });
        assert_eq!(ManifoldSpec::parse("disk").unwrap(), ManifoldSpec::Disk { radius: 1.0, orientation: 1 });
        assert_eq!(ManifoldSpec::parse("ball:2:-1").unwrap(), ManifoldSpec::Ball { radius: 2.0, orientation: -1 });
        assert!(ManifoldSpec::parse("torus:1").is_err());
        let js: ManifoldSpec = serde_json::from_str(r#"{"kind":"ellipse","a":2,"b":1}"#).unwrap();
        assert_eq!(js, ManifoldSpec::Ellipse { a: 2.0, b: 1.0, orientation: 1 });
    }

    #[test]
    fn circle_exponential() {
        let m = disk();
        let q = m.curve_point(0.0);
        let p = m.exp(&q, &[std::f64::consts::FRAC_PI_2]).unwrap();
        assert!((p.x - V3::new(0.0, 1.0, 0.0)).norm() < 1e-10);
        let p0 = m.exp(&q, &[0.0]).unwrap();
        assert!((p0.x - q.x).norm() < 1e-14);
    }

    #[test]
    fn ellipse_exponential_preserves_arclength() {
        let m = ellipse();
        let q = m.curve_point(0.0);
        for s in [0.3, 1.1] {
            let p1 = m.exp(&q, &[s]).unwrap();
            let p2 = m.exp(&q, &[-s]).unwrap();
            // Independent arc length by a fine Gauss rule on the parameter.
            let check = |t: f64| crate::numerics::integrate_gl(&gauss_legendre(20), 0.0, t, 64, |u| m.speed(u));
            let t1 = p1.param[0];
            let t2 = p2.param[0] - TWO_PI;
            assert!((check(t1) - s).abs() < 1e-8);
            assert!((check(t2).abs() - s).abs() < 1e-8);
        }
        let chart = FermiChart::new(&m, m.curve_point(0.7));
        for s in [0.0, 0.1, 0.25] {
            let (d, _) = richardson_diff(|u| chart.map_unchecked(&[u], 0.0)[0], s, 1e-3);
            let (e, _) = richardson_diff(|u| chart.map_unchecked(&[u], 0.0)[1], s, 1e-3);
            assert!(((d * d + e * e).sqrt() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn circle_fermi_map() {
        let m = disk();
        let chart = FermiChart::new(&m, m.curve_point(0.0));
        let x = chart.fermi_map(&[0.0], 0.3).unwrap();
        assert!((x - V3::new(0.7, 0.0, 0.0)).norm() < 1e-14);
        let x = chart.fermi_map(&[0.4], 0.3).unwrap();
        assert!((x - V3::new(0.7 * 0.4f64.cos(), 0.7 * 0.4f64.sin(), 0.0)).norm() < 1e-12);
        let x = chart.fermi_map(&[0.0], 0.0).unwrap();
        assert!((x - chart.base.x).norm() < 1e-15);
        assert!(matches!(chart.fermi_map(&[0.9], 0.5), Err(Error::OutOfChart { .. })));
    }

    #[test]
    fn disk_volume_element() {
        let m = disk();
        let chart = FermiChart::new(&m, m.curve_point(1.0));
        for t in [0.0, 0.1, 0.3, 0.6] {
            let ms = chart.metric(&[0.0], t).unwrap();
            assert!((ms.sqrt_det - (1.0 - t)).abs() < 1e-9);
        }
        let ms = chart.metric(&[0.0], 0.0).unwrap();
        assert!((ms.g - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-10);
    }

    #[test]
    fn metric_identity_at_origin_everywhere() {
        let m = ellipse();
        for k in 0..8 {
            let chart = FermiChart::new(&m, m.curve_point(k as f64 * 0.7));
            let ms = chart.metric(&[0.0], 0.0).unwrap();
            let dev = (ms.g - DMatrix::<f64>::identity(2, 2)).abs().max();
            assert!(dev < 1e-10, "k={k} dev={dev:e}");
        }
        let b = ball();
        let chart = FermiChart::new(&b, b.surface_point(0.3, 1.0));
        let ms = chart.metric(&[0.0, 0.0], 0.0).unwrap();
        assert!((ms.g - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-10);
    }

    #[test]
    fn singular_metric_beyond_reach() {
        let m = disk();
        let mut chart = FermiChart::new(&m, m.curve_point(0.0));
        chart.r_chart = 10.0;
        assert!(matches!(chart.metric(&[0.0], 1.5), Err(Error::SingularMetric(_))));
    }

    #[test]
    fn curvature_oracles() {
        let d = disk();
        for t in [0.0, 1.0, 2.5] {
            let rep = second_fundamental_form(&d, &d.curve_point(t));
            assert!((rep.mean - 1.0).abs() < 1e-14);
            assert!(rep.grad[0].abs() < 1e-10);
        }
        let e = ellipse();
        assert!((e.mean_curvature_at(&e.curve_point(0.0)) - 2.0).abs() < 1e-14);
        assert!((e.mean_curvature_at(&e.curve_point(std::f64::consts::FRAC_PI_2)) - 0.25).abs() < 1e-14);
        for t in [0.3, 0.9, 2.0, 4.0] {
            let rep = second_fundamental_form(&e, &e.curve_point(t));
            assert!((rep.mean - kappa(t)).abs() < 1e-13);
            assert!((rep.grad[0] - kappa_prime_s(t)).abs() < 1e-7, "t={t}");
        }
        let b = ball();
        let rep = second_fundamental_form(&b, &b.surface_point(0.4, 1.2));
        assert!((rep.h[0][0] - 1.0).abs() < 1e-14 && (rep.h[1][1] - 1.0).abs() < 1e-14 && rep.h[0][1].abs() < 1e-14);
        assert!((rep.mean - 1.0).abs() < 1e-14);
        let flipped = BoundaryManifold::new(ManifoldSpec::Disk { radius: 1.0, orientation: -1 }).unwrap();
        assert!((flipped.mean_curvature_at(&flipped.curve_point(0.0)) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn closest_point_recovers_fermi_coordinates() {
        let m = ellipse();
        let chart = FermiChart::new(&m, m.curve_point(0.4));
        for &(s, yn) in &[(0.0, 0.1), (0.1, 0.2), (-0.2, 0.24)] {
            let x = chart.fermi_map(&[s], yn).unwrap();
            let (ybar, d) = chart.inverse(&x).unwrap();
            assert!((ybar[0] - s).abs() < 1e-8 && (d - yn).abs() < 1e-8);
            assert!(m.contains(&x));
        }
        let b = BoundaryManifold::new(ManifoldSpec::Spheroid { a: 1.5, c: 1.0, orientation: 1 }).unwrap();
        let chart = FermiChart::new(&b, b.surface_point(0.2, 1.0));
        let x = chart.fermi_map(&[0.1, -0.05], 0.2).unwrap();
        let (ybar, d) = chart.inverse(&x).unwrap();
        assert!((ybar[0] - 0.1).abs() < 1e-8 && (ybar[1] + 0.05).abs() < 1e-8 && (d - 0.2).abs() < 1e-8);
    }

    #[test]
    fn sphere_geodesic_is_great_circle() {
        let b = ball();
        let q = b.surface_point(0.0, std::f64::consts::FRAC_PI_2);
        let p = b.exp(&q, &[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        assert!((p.x - V3::new(0.0, 1.0, 0.0)).norm() < 1e-10);
        let back = b.log(&q, &p.x).unwrap();
        assert!((back[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-9 && back[1].abs() < 1e-9);
    }

    #[test]
    fn metric_expansion_disk_and_ellipse() {
        let d = disk();
        let rep = verify_metric_expansion(&FermiChart::new(&d, d.curve_point(0.3))).unwrap();
        assert!(rep.g_residual < 1e-6);
        assert!(rep.identity_at_origin < 1e-10);
        assert!(rep.g2_max < 1e-8);

        let e = ellipse();
        let rep = verify_metric_expansion(&FermiChart::new(&e, e.curve_point(0.0))).unwrap();
        assert!(rep.mixed[0].abs() < 1e-6, "{:?}", rep.mixed);
        assert!(rep.g1_slope >= 1.9 && rep.g3_slope >= 1.9, "{} {}", rep.g1_slope, rep.g3_slope);

        let t0 = std::f64::consts::FRAC_PI_6;
        let rep = verify_metric_expansion(&FermiChart::new(&e, e.curve_point(t0))).unwrap();
        assert!((rep.mixed[0] + kappa_prime_s(t0)).abs() < 1e-4, "{:?} vs {}", rep.mixed, -kappa_prime_s(t0));
        assert!((e.curve_curvature_slope(t0) - kappa_prime_s(t0)).abs() < 1e-12);
        let d = disk();
        assert_eq!(d.curve_curvature_slope(0.4), 0.0);
        assert!(rep.g1_slope >= 1.9 && rep.g3_slope >= 1.9);
    }

    #[test]
    fn transition_identities_on_curves() {
        let c = disk();
        let rep = transition_derivatives(&c, &c.curve_point(0.0)).unwrap();
        assert!(rep.d_y < 1e-6 && rep.d_eta < 1e-6 && rep.e_at_zero_y < 1e-10);
        let e = ellipse();
        let rep = transition_derivatives(&e, &e.curve_point(0.5)).unwrap();
        assert!(rep.e_at_zero_y < 1e-10);
        assert!(rep.d_y < 1e-6 && rep.d_eta < 1e-6);
        assert!(rep.mixed.iter().all(|v| *v < 1e-8), "{:?}", rep.mixed);
        assert!(rep.h_normal < 1e-6);
    }

    #[test]
    fn transition_mixed_derivative_decays_on_spheroid() {
        // On the round sphere both reflection symmetries make the stencil
        // vanish identically, so use a spheroid off the equator.
        let b = BoundaryManifold::new(ManifoldSpec::Spheroid { a: 1.5, c: 1.0, orientation: 1 }).unwrap();
        let rep = transition_derivatives(&b, &b.surface_point(0.0, 1.0)).unwrap();
        assert!(rep.e_at_zero_y < 1e-10);
        assert!(rep.d_y < 1e-6 && rep.d_eta < 1e-6, "{rep:?}");
        assert!(rep.mixed_slope >= 1.0, "{rep:#?}");
    }

    #[test]
    fn ellipse_critical_points() {
        let e = ellipse();
        let pts = find_critical_points(&e, 256).unwrap();
        assert_eq!(pts.len(), 4);
        let maxima: Vec<_> = pts.iter().filter(|p| p.kind == CriticalKind::Max).collect();
        let minima: Vec<_> = pts.iter().filter(|p| p.kind == CriticalKind::Min).collect();
        assert_eq!(maxima.len(), 2);
        assert_eq!(minima.len(), 2);
        for p in &maxima {
            assert!((p.location[0].abs() - 2.0).abs() < 1e-9 && p.location[1].abs() < 1e-9);
        }
        for p in &minima {
            assert!(p.location[0].abs() < 1e-9 && (p.location[1].abs() - 1.0).abs() < 1e-9);
        }
        assert!(pts.iter().all(|p| p.stable));
    }

    #[test]
    fn degenerate_landscapes() {
        assert!(matches!(find_critical_points(&disk(), 128), Err(Error::DegenerateLandscape { .. })));
        let near = BoundaryManifold::new(ManifoldSpec::Ellipse { a: 1.0 + 1e-12, b: 1.0 + 1e-12, orientation: 1 }).unwrap();
        assert!(matches!(find_critical_points(&near, 128), Err(Error::DegenerateLandscape { .. })));
        assert!(matches!(find_critical_points(&ball(), 64), Err(Error::DegenerateLandscape { .. })));
    }

    #[test]
    fn spheroid_critical_set() {
        let s = BoundaryManifold::new(ManifoldSpec::Spheroid { a: 1.5, c: 1.0, orientation: 1 }).unwrap();
        let pts = find_critical_points(&s, 64).unwrap();
        // Two poles and the equatorial circle.
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().filter(|p| p.isolated).count() == 2);
    }
}
