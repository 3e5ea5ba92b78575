//! Small numerical kernels shared by the modules: quadrature rules,
//! finite differences, least-squares lines and an RK4 step.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(k: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(k.max(1)).unwrap());
    let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs
}

/// Map a rule on [-1, 1] to [a, b].
pub fn map_rule(rule: &[(f64, f64)], a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    rule.iter().map(move |&(x, w)| (c + r * x, r * w))
}

/// Composite Gauss–Legendre over `panels` equal pieces of [a, b].
pub fn integrate_gl<F: FnMut(f64) -> f64>(rule: &[(f64, f64)], a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * w;
        for (x, wt) in map_rule(rule, lo, lo + w) {
            s += wt * f(x);
        }
    }
    s
}

/// Composite Simpson on a uniform grid. An odd number of intervals is
/// closed with the 3/8 rule on the last three.
pub fn simpson(y: &[f64], h: f64) -> f64 {
    let m = y.len();
    if m < 2 {
        return 0.0;
    }
    let intervals = m - 1;
    if intervals == 1 {
        return 0.5 * h * (y[0] + y[1]);
    }
    let (even_end, tail) = if intervals % 2 == 0 { (intervals, false) } else { (intervals - 3, true) };
    let mut s = 0.0;
    if even_end > 0 {
        s += y[0] + y[even_end];
        for i in 1..even_end {
            s += if i % 2 == 1 { 4.0 * y[i] } else { 2.0 * y[i] };
        }
        s *= h / 3.0;
    }
    if tail {
        let k = even_end;
        s += 3.0 * h / 8.0 * (y[k] + 3.0 * y[k + 1] + 3.0 * y[k + 2] + y[k + 3]);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

/// Ordinary least squares for y = intercept + slope * x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LinearFit { intercept, slope, r2 }
}

/// Slope of log|y| against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&lx, &ly).slope
}

/// Centered first derivative with one Richardson step; returns the
/// extrapolated value and the difference to the finer plain estimate.
pub fn richardson_diff<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> (f64, f64) {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let h2 = 0.5 * h;
    let d2 = (f(x + h2) - f(x - h2)) / (2.0 * h2);
    let r = (4.0 * d2 - d1) / 3.0;
    (r, (r - d2).abs())
}

/// Centered second derivative with one Richardson step.
pub fn richardson_diff2<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let mut d = |h: f64| (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
    let d1 = d(h);
    let d2 = d(0.5 * h);
    (4.0 * d2 - d1) / 3.0
}

/// Classical fourth-order Runge–Kutta step for y' = f(t, y).
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: [f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| {
        let mut o = *a;
        for i in 0..N {
            o[i] += s * b[i];
        }
        o
    };
    let k1 = f(t, &y);
    let k2 = f(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(&y, &k3, h));
    let mut o = y;
    for i in 0..N {
        o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    o
}

/// Bisection for a sign change of `f` on [a, b].
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let rule = gauss_legendre(5);
        let s: f64 = map_rule(&rule, 0.0, 2.0).map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn simpson_odd_and_even_counts() {
        for m in [11usize, 12] {
            let h = 1.0 / (m - 1) as f64;
            let y: Vec<f64> = (0..m).map(|i| (i as f64 * h).powi(3)).collect();
            assert!((simpson(&y, h) - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_line_is_recovered() {
        let x = [0.02, 0.03, 0.04, 0.06, 0.08];
        let y: Vec<f64> = x.iter().map(|e| 7.0 - 2.0 * e).collect();
        let fit = linear_fit(&x, &y);
        assert!((fit.intercept - 7.0).abs() < 1e-12);
        assert!((fit.slope + 2.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_derivative_of_sin() {
        let (d, _) = richardson_diff(f64::sin, 0.3, 1e-2);
        assert!((d - 0.3f64.cos()).abs() < 1e-10);
        let d2 = richardson_diff2(f64::sin, 0.3, 1e-2);
        assert!((d2 + 0.3f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn rk4_exponential() {
        let f = |_t: f64, y: &[f64; 1]| [y[0]];
        let mut y = [1.0];
        for i in 0..100 {
            y = rk4_step(&f, i as f64 * 0.01, y, 0.01);
        }
        assert!((y[0] - 1f64.exp()).abs() < 1e-9);
    }
}
