//! Finite-difference spectrum of the half-space linearization
//! −Δ + 1 − (p−1)U^{p−2} with ∂/∂z_n = 0 on {z_n = 0}.
//!
//! The ghost-node Neumann closure makes the raw stencil A non-symmetric
//! (the face row couples to its inner neighbour with weight 2/h²). It is
//! symmetric in the trapezoid inner product W (weight ½ on the face), so
//! the solvers work with Ã = W^{1/2} A W^{-1/2}. Eigenvectors of Ã are
//! ψ = W^{1/2} φ.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatMut, MatRef, Par};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, Csr};
use crate::profile::{pos_pow, GroundStateProfile};

#[derive(Debug, Clone, Serialize)]
pub struct HalfBoxGrid {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub h: f64,
    #[serde(skip)]
    dims: Vec<usize>,
}

impl HalfBoxGrid {
    /// Nodes of [−L, L]^{n−1} × [0, L] at spacing h, outer faces excluded
    /// (homogeneous Dirichlet).
    pub fn new(n: usize, l: f64, h: f64) -> Result<HalfBoxGrid> {
        if !(2..=3).contains(&n) {
            return Err(Error::InvalidParameters(format!("grid dimension {n} not in {{2, 3}}")));
        }
        if !(l >= 12.0) {
            return Err(Error::InvalidParameters(format!("half-width L = {l} must be at least 12")));
        }
        if !(h > 0.0 && h <= l / 60.0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameters(format!("mesh step h = {h} must lie in (0, L/60]")));
        }
        let m = l / h;
        if (m - m.round()).abs() > 1e-9 * m {
            return Err(Error::InvalidParameters(format!("L/h = {m} must be an integer")));
        }
        let m = m.round() as usize;
        let mut dims = vec![2 * m - 1; n - 1];
        dims.push(m);
        Ok(HalfBoxGrid { n, l, h, dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat index (normal coordinate fastest).
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for a in (0..self.n).rev() {
            idx[a] = k % self.dims[a];
            k /= self.dims[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i)
    }

    pub fn coords(&self, k: usize) -> Vec<f64> {
        let idx = self.multi_index(k);
        let mut z: Vec<f64> = idx[..self.n - 1].iter().map(|&i| -self.l + (i + 1) as f64 * self.h).collect();
        z.push(idx[self.n - 1] as f64 * self.h);
        z
    }

    /// Trapezoid weights without the h^n factor: ½ on the Neumann face.
    pub fn face_weights(&self) -> Vec<f64> {
        let dn = self.dims[self.n - 1];
        (0..self.len()).map(|k| if k % dn == 0 { 0.5 } else { 1.0 }).collect()
    }

    /// Index of the node mirrored in tangential coordinate `axis`.
    fn reflect(&self, k: usize, axis: usize) -> usize {
        let mut idx = self.multi_index(k);
        idx[axis] = self.dims[axis] - 1 - idx[axis];
        self.flat_index(&idx)
    }
}

pub struct LinearizedOperator {
    pub grid: HalfBoxGrid,
    pub p: f64,
    /// Symmetrized operator Ã.
    pub matrix: Csr,
    pub potential: Vec<f64>,
    sqrt_w: Vec<f64>,
    profile_samples: Vec<(f64, f64)>,
}

impl LinearizedOperator {
    /// Raw stencil A u = W^{-1/2} Ã W^{1/2} u.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let x: Vec<f64> = u.iter().zip(&self.sqrt_w).map(|(a, s)| a * s).collect();
        self.matrix.mul(&x).iter().zip(&self.sqrt_w).map(|(a, s)| a / s).collect()
    }

    /// Discrete L² norm in the trapezoid inner product.
    pub fn l2_norm(&self, u: &[f64]) -> f64 {
        let hn = self.grid.h.powi(self.grid.n as i32);
        u.iter().zip(&self.sqrt_w).map(|(a, s)| (a * s).powi(2)).sum::<f64>().sqrt() * hn.sqrt()
    }

    /// ∂U/∂z_i sampled at the nodes (i = 1..n).
    pub fn derivative_field(&self, i: usize) -> Vec<f64> {
        assert!(i >= 1 && i <= self.grid.n);
        (0..self.grid.len())
            .map(|k| {
                let z = self.grid.coords(k);
                let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                let (_, du) = self.profile_samples[k];
                if r == 0.0 {
                    0.0
                } else {
                    du * z[i - 1] / r
                }
            })
            .collect()
    }

    pub fn profile_field(&self) -> Vec<f64> {
        self.profile_samples.iter().map(|s| s.0).collect()
    }

    fn to_sym(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.sqrt_w).map(|(a, s)| a * s).collect()
    }
}

pub fn assemble_linearized(prof: &GroundStateProfile, grid: &HalfBoxGrid) -> Result<LinearizedOperator> {
    if prof.n != grid.n {
        return Err(Error::DimensionMismatch { expected: grid.n, got: prof.n });
    }
    let n = grid.n;
    let h2 = grid.h * grid.h;
    let off = -1.0 / h2;
    let face = -std::f64::consts::SQRT_2 / h2;
    let dims = grid.dims().to_vec();
    let dn = dims[n - 1];
    let len = grid.len();
    let mut samples = Vec::with_capacity(len);
    let mut potential = Vec::with_capacity(len);
    let mut t = Vec::with_capacity(len * (2 * n + 1));
    let mut strides = vec![1usize; n];
    for a in (0..n - 1).rev() {
        strides[a] = strides[a + 1] * dims[a + 1];
    }
    for k in 0..len {
        let z = grid.coords(k);
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (u, du) = prof.eval(r);
        samples.push((u, du));
        let v = (prof.p - 1.0) * pos_pow(u, prof.p - 2.0);
        potential.push(v);
        t.push((k, k, 2.0 * n as f64 / h2 + 1.0 - v));
        let idx = grid.multi_index(k);
        for a in 0..n - 1 {
            if idx[a] > 0 {
                t.push((k, k - strides[a], off));
            }
            if idx[a] + 1 < dims[a] {
                t.push((k, k + strides[a], off));
            }
        }
        let j = idx[n - 1];
        if j > 0 {
            t.push((k, k - 1, if j == 1 { face } else { off }));
        }
        if j + 1 < dn {
            t.push((k, k + 1, if j == 0 { face } else { off }));
        }
    }
    let matrix = Csr::from_triplets(len, t);
    let asym = matrix.max_asymmetry();
    assert!(asym == 0.0, "linearized operator lost symmetry ({asym})");
    let sqrt_w = grid.face_weights().iter().map(|w| w.sqrt()).collect();
    Ok(LinearizedOperator { grid: grid.clone(), p: prof.p, matrix, potential, sqrt_w, profile_samples: samples })
}

/// 2 (h² + e^{−L}). The second-order stencil shifts the translation
/// eigenvalue by about −1.3 h² for (n, p) = (2, 4).
pub fn default_kernel_tol(grid: &HalfBoxGrid) -> f64 {
    2.0 * (grid.h * grid.h + (-grid.l).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct Overlaps {
    /// Per eigenvector, cosines with ∂U/∂z_i for i = 1..n−1.
    #[serde(rename = "dU_dz_i")]
    pub tangential: Vec<Vec<f64>>,
    #[serde(rename = "dU_dz_n")]
    pub normal: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub overlaps: Overlaps,
    pub gap: f64,
    pub kernel_tol: f64,
    pub cluster_size: usize,
    pub grid: HalfBoxGrid,
    /// Near-kernel eigenvectors of Ã (trapezoid-weighted), orthonormal.
    #[serde(skip)]
    pub kernel_vectors: Vec<Vec<f64>>,
}

impl SpectrumReport {
    pub fn max_normal_overlap_in_cluster(&self) -> f64 {
        self.overlaps.normal[..self.cluster_size].iter().copied().fold(0.0, f64::max)
    }
}

fn start_vector(len: usize, seed: f64) -> Vec<f64> {
    (0..len).map(|i| 1.0 + 0.3 * (seed * i as f64).sin()).collect()
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Lanczos with full reorthogonalization for the `nev` eigenvalues of
/// largest magnitude of a symmetric map, optionally deflated.
fn lanczos<F: FnMut(&[f64]) -> Vec<f64>>(
    mut apply: F,
    start: Vec<f64>,
    deflate: &[Vec<f64>],
    nev: usize,
    tol: f64,
    max_steps: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let len = start.len();
    let max_steps = max_steps.min(len);
    let mut v = start;
    project_out(&mut v, deflate);
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::EigenNotConverged("start vector lies in the deflation space".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    loop {
        let j = basis.len() - 1;
        let mut w = apply(&basis[j]);
        project_out(&mut w, deflate);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(-c, b, &mut w);
            }
        }
        let b = norm(&w);
        let m = alpha.len();
        let exhausted = b < 1e-12 * a.abs().max(1.0) || m >= max_steps;
        if m >= nev + 4 && (m % 5 == 0 || exhausted) {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].abs().partial_cmp(&eig.eigenvalues[x].abs()).unwrap());
            let wanted = &order[..nev.min(m)];
            let converged = wanted.iter().all(|&i| (b * eig.eigenvectors[(m - 1, i)]).abs() <= tol * eig.eigenvalues[i].abs());
            if converged || exhausted {
                if !converged && b >= 1e-12 * a.abs().max(1.0) {
                    return Err(Error::EigenNotConverged(format!("Lanczos stalled after {m} steps")));
                }
                let mut vals = Vec::new();
                let mut vecs = Vec::new();
                for &i in wanted {
                    vals.push(eig.eigenvalues[i]);
                    let mut x = vec![0.0; len];
                    for (k, q) in basis.iter().enumerate().take(m) {
                        axpy(eig.eigenvectors[(k, i)], q, &mut x);
                    }
                    let nx = norm(&x);
                    x.iter_mut().for_each(|c| *c /= nx);
                    vecs.push(x);
                }
                return Ok((vals, vecs));
            }
        }
        if exhausted {
            return Err(Error::EigenNotConverged(format!("Lanczos stalled after {m} steps")));
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
}

/// Dense eigenbasis of one 1-D factor of the symmetrized Laplacian.
fn factor_eigen(d: usize, h: f64, neumann_face: bool) -> (Mat<f64>, Vec<f64>) {
    let h2 = h * h;
    let mut t = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        t[(i, i)] = 2.0 / h2;
        if i + 1 < d {
            let c = if neumann_face && i == 0 { -std::f64::consts::SQRT_2 / h2 } else { -1.0 / h2 };
            t[(i, i + 1)] = c;
            t[(i + 1, i)] = c;
        }
    }
    let eig = SymmetricEigen::new(t);
    let q = Mat::from_fn(d, d, |i, j| eig.eigenvectors[(i, j)]);
    (q, eig.eigenvalues.iter().copied().collect())
}

/// Exact solver for (−Δ̃ + shift) by fast diagonalization.
struct FastDiag {
    dims: Vec<usize>,
    q: Vec<Mat<f64>>,
    lam: Vec<Vec<f64>>,
    shift: f64,
}

impl FastDiag {
    fn new(grid: &HalfBoxGrid, shift: f64) -> FastDiag {
        let n = grid.n;
        let mut q = Vec::new();
        let mut lam = Vec::new();
        for a in 0..n {
            let (qa, la) = factor_eigen(grid.dims()[a], grid.h, a == n - 1);
            q.push(qa);
            lam.push(la);
        }
        FastDiag { dims: grid.dims().to_vec(), q, lam, shift }
    }

    fn transform(&self, x: &[f64], out: &mut Vec<f64>, forward: bool) {
        let mut cur = x.to_vec();
        out.resize(x.len(), 0.0);
        for a in 0..self.dims.len() {
            let d = self.dims[a];
            let inner: usize = self.dims[a + 1..].iter().product();
            let slab = d * inner;
            let q = self.q[a].as_ref();
            let rhs = if forward { q } else { q.transpose() };
            for (src, dst) in cur.chunks(slab).zip(out.chunks_mut(slab)) {
                let s = MatRef::from_column_major_slice(src, inner, d);
                let o = MatMut::from_column_major_slice_mut(dst, inner, d);
                matmul(o, Accum::Replace, s, rhs, 1.0, Par::Seq);
            }
            std::mem::swap(&mut cur, out);
        }
        std::mem::swap(&mut cur, out);
    }

    fn solve(&self, r: &[f64]) -> Vec<f64> {
        let mut c = Vec::new();
        self.transform(r, &mut c, true);
        let n = self.dims.len();
        let mut idx = vec![0usize; n];
        for v in c.iter_mut() {
            let s: f64 = (0..n).map(|a| self.lam[a][idx[a]]).sum::<f64>() + self.shift;
            *v /= s;
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < self.dims[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        let mut out = Vec::new();
        self.transform(&c, &mut out, false);
        out
    }
}

/// Modified Gram–Schmidt (two passes) against `fixed`, dropping columns
/// that become numerically dependent.
fn orthonormalize(cols: Vec<Vec<f64>>, fixed: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in cols {
        let n0 = norm(&v);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in fixed.iter().chain(out.iter()) {
                let c = dot(&v, b);
                axpy(-c, b, &mut v);
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * n0 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}

/// Block LOBPCG for the `want` smallest eigenvalues of a symmetric matrix
/// on the complement of `constraints`.
fn lobpcg(
    a: &Csr,
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    constraints: &[Vec<f64>],
    init: Vec<Vec<f64>>,
    want: usize,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let block = init.len();
    let mut x = orthonormalize(init, constraints);
    if x.len() < block {
        return Err(Error::EigenNotConverged("initial block is rank deficient".into()));
    }
    let mut p: Vec<Vec<f64>> = Vec::new();
    let mut lambda = vec![0.0; block];
    let mut ax: Vec<Vec<f64>> = x.iter().map(|v| a.mul(v)).collect();
    for it in 0..max_iter {
        let mut rs = Vec::with_capacity(block);
        let mut worst: f64 = 0.0;
        for i in 0..block {
            lambda[i] = dot(&x[i], &ax[i]);
            let mut r = ax[i].clone();
            axpy(-lambda[i], &x[i], &mut r);
            if i < want {
                worst = worst.max(norm(&r));
            }
            rs.push(r);
        }
        if worst < tol && it > 0 {
            let mut order: Vec<usize> = (0..block).collect();
            order.sort_by(|&i, &j| lambda[i].partial_cmp(&lambda[j]).unwrap());
            let vals = order[..want].iter().map(|&i| lambda[i]).collect();
            let vecs = order[..want].iter().map(|&i| x[i].clone()).collect();
            return Ok((vals, vecs));
        }
        let w: Vec<Vec<f64>> = rs.iter().map(|r| precond(r)).collect();
        let mut fixed = constraints.to_vec();
        fixed.extend(x.iter().cloned());
        let mut extra = orthonormalize(w, &fixed);
        fixed.extend(extra.iter().cloned());
        let pq = orthonormalize(std::mem::take(&mut p), &fixed);
        let nw = extra.len();
        extra.extend(pq);
        let mut q = x.clone();
        q.extend(extra);
        let aq: Vec<Vec<f64>> = ax.iter().cloned().chain(q[block..].iter().map(|v| a.mul(v))).collect();
        let m = q.len();
        let mut hm = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = 0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i]));
                hm[(i, j)] = v;
                hm[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(hm);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let len = x[0].len();
        let mut nx = Vec::with_capacity(block);
        let mut nax = Vec::with_capacity(block);
        let mut np = Vec::with_capacity(block);
        for &c in &order[..block] {
            let mut xv = vec![0.0; len];
            let mut axv = vec![0.0; len];
            let mut pv = vec![0.0; len];
            for k in 0..m {
                let coef = eig.eigenvectors[(k, c)];
                axpy(coef, &q[k], &mut xv);
                axpy(coef, &aq[k], &mut axv);
                if k >= block {
                    axpy(coef, &q[k], &mut pv);
                }
            }
            nx.push(xv);
            nax.push(axv);
            np.push(pv);
        }
        x = nx;
        ax = nax;
        p = if nw > 0 { np } else { Vec::new() };
    }
    Err(Error::EigenNotConverged(format!("LOBPCG did not reach residual {tol:e} in {max_iter} iterations")))
}

/// Rotate a degenerate cluster so that each vector has definite parity
/// under the tangential reflections.
fn parity_diagonalize(grid: &HalfBoxGrid, vecs: &mut [Vec<f64>]) {
    let m = vecs.len();
    if m < 2 {
        return;
    }
    let len = grid.len();
    let mut pm = DMatrix::<f64>::zeros(m, m);
    for axis in 0..grid.n - 1 {
        let scale = (1 << axis) as f64;
        let refl: Vec<Vec<f64>> = vecs.iter().map(|v| (0..len).map(|k| v[grid.reflect(k, axis)]).collect()).collect();
        for i in 0..m {
            for j in 0..m {
                pm[(i, j)] += scale * 0.5 * (dot(&vecs[i], &refl[j]) + dot(&vecs[j], &refl[i]));
            }
        }
    }
    let eig = SymmetricEigen::new(pm);
    let rotated: Vec<Vec<f64>> = (0..m)
        .map(|c| {
            let mut x = vec![0.0; len];
            for (k, v) in vecs.iter().enumerate() {
                axpy(eig.eigenvectors[(k, c)], v, &mut x);
            }
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            x
        })
        .collect();
    for (v, r) in vecs.iter_mut().zip(rotated) {
        *v = r;
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).abs().min(1.0)
}

/// Smallest-magnitude eigenpairs of Ã (eigenvalues sorted by |λ|).
fn lowest_pairs(op: &LinearizedOperator, k: usize, deflate: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let len = op.grid.len();
    if op.grid.n == 2 {
        let lu = op.matrix.lu()?;
        let (theta, vecs) = lanczos(|v| lu.solve(v), start_vector(len, 1.7), deflate, k, 1e-10, 300.min(len))?;
        let vals: Vec<f64> = theta.iter().map(|t| 1.0 / t).collect();
        Ok((vals, vecs))
    } else {
        let fd = FastDiag::new(&op.grid, 1.0);
        let mut init = vec![op.to_sym(&op.profile_field())];
        for i in 1..=op.grid.n {
            init.push(op.to_sym(&op.derivative_field(i)));
        }
        let mut seed = 1.7;
        while init.len() < k + 2 {
            init.push(start_vector(len, seed));
            seed += 0.61;
        }
        let want = (k + 1).min(init.len());
        let (vals, vecs) = lobpcg(&op.matrix, &|r| fd.solve(r), deflate, init, want, 1e-6, 400)?;
        let mut pairs: Vec<(f64, Vec<f64>)> = vals.into_iter().zip(vecs).collect();
        pairs.sort_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).unwrap());
        pairs.truncate(k);
        Ok(pairs.into_iter().unzip())
    }
}

pub fn kernel_report(op: &LinearizedOperator, k: usize) -> Result<SpectrumReport> {
    kernel_report_with_tol(op, k, default_kernel_tol(&op.grid))
}

pub fn kernel_report_with_tol(op: &LinearizedOperator, k: usize, kernel_tol: f64) -> Result<SpectrumReport> {
    let n = op.grid.n;
    if k < n + 1 {
        return Err(Error::InvalidParameters(format!("need k >= n+1 = {}, got {k}", n + 1)));
    }
    let (vals, mut vecs) = lowest_pairs(op, k, &[])?;
    let cluster_size = vals.iter().filter(|v| v.abs() < kernel_tol).count();
    parity_diagonalize(&op.grid, &mut vecs[..cluster_size]);
    let fields: Vec<Vec<f64>> = (1..=n).map(|i| op.to_sym(&op.derivative_field(i))).collect();
    let tangential = vecs.iter().map(|v| fields[..n - 1].iter().map(|f| cosine(v, f)).collect()).collect();
    let normal = vecs.iter().map(|v| cosine(v, &fields[n - 1])).collect();
    let gap = vals.iter().filter(|v| v.abs() >= kernel_tol).map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    Ok(SpectrumReport {
        eigenvalues: vals,
        overlaps: Overlaps { tangential, normal },
        gap,
        kernel_tol,
        cluster_size,
        grid: op.grid.clone(),
        kernel_vectors: vecs[..cluster_size].to_vec(),
    })
}

/// Smallest |λ| of Ã restricted to the orthogonal complement of `kernel`.
pub fn coercivity_gap(op: &LinearizedOperator, kernel: &[Vec<f64>]) -> Result<f64> {
    let k = if op.grid.n == 2 { 1 } else { 2 };
    let (vals, _) = lowest_pairs(op, k, kernel)?;
    Ok(vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::default_profile;

    fn small_op() -> LinearizedOperator {
        let prof = default_profile(2, 4.0).unwrap();
        let grid = HalfBoxGrid::new(2, 12.0, 0.2).unwrap();
        assemble_linearized(&prof, &grid).unwrap()
    }

    #[test]
    fn grid_preconditions() {
        assert!(HalfBoxGrid::new(2, 10.0, 0.1).is_err());
        assert!(HalfBoxGrid::new(2, 12.0, 0.3).is_err());
        assert!(HalfBoxGrid::new(4, 12.0, 0.1).is_err());
        let g = HalfBoxGrid::new(2, 14.0, 0.1).unwrap();
        assert_eq!(g.dims(), &[279, 140]);
        assert_eq!(g.len(), 39060);
        for k in [0, 1, 140, 39059] {
            assert_eq!(g.flat_index(&g.multi_index(k)), k);
        }
        let prof = default_profile(3, 3.0).unwrap();
        assert!(matches!(assemble_linearized(&prof, &g), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn constant_field_sees_only_the_potential() {
        let op = small_op();
        let ones = vec![1.0; op.grid.len()];
        let au = op.apply(&ones);
        let d = op.grid.dims().to_vec();
        for k in 0..op.grid.len() {
            let idx = op.grid.multi_index(k);
            if idx[0] == 0 || idx[0] + 1 == d[0] || idx[1] + 1 == d[1] {
                continue;
            }
            assert!((au[k] - (1.0 - op.potential[k])).abs() < 1e-9);
        }
    }

    #[test]
    fn tangential_derivative_is_nearly_annihilated() {
        let prof = default_profile(2, 4.0).unwrap();
        let rel = |h: f64, i: usize| {
            let op = assemble_linearized(&prof, &HalfBoxGrid::new(2, 12.0, h).unwrap()).unwrap();
            let f = op.derivative_field(i);
            op.l2_norm(&op.apply(&f)) / op.l2_norm(&f)
        };
        let (t2, t1) = (rel(0.2, 1), rel(0.1, 1));
        let (n2, n1) = (rel(0.2, 2), rel(0.1, 2));
        assert!(t2 / t1 > 3.5, "{t2} {t1}");
        assert!(n1 > 1.0 && n2 / n1 < 2.0, "{n2} {n1}");
    }

    #[test]
    fn fast_diag_inverts_free_operator() {
        let grid = HalfBoxGrid::new(3, 12.0, 0.2).unwrap();
        let g = HalfBoxGrid { dims: vec![7, 5, 4], ..grid };
        let fd = FastDiag::new(&g, 1.0);
        let len = g.len();
        let mut t = Vec::new();
        let h2 = g.h * g.h;
        for k in 0..len {
            let idx = g.multi_index(k);
            t.push((k, k, 6.0 / h2 + 1.0));
            for a in 0..3 {
                for s in [-1i64, 1] {
                    let j = idx[a] as i64 + s;
                    if j < 0 || j >= g.dims[a] as i64 {
                        continue;
                    }
                    let mut nb = idx.clone();
                    nb[a] = j as usize;
                    let c = if a == 2 && (idx[a] == 0 || j == 0) { -std::f64::consts::SQRT_2 / h2 } else { -1.0 / h2 };
                    t.push((k, g.flat_index(&nb), c));
                }
            }
        }
        let a = Csr::from_triplets(len, t);
        let b = start_vector(len, 0.9);
        let x = fd.solve(&b);
        let r = a.mul(&x);
        for i in 0..len {
            assert!((r[i] - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn lobpcg_matches_lanczos_on_small_grid() {
        let op = small_op();
        let (vals, _) = lowest_pairs(&op, 3, &[]).unwrap();
        let fd = FastDiag::new(&op.grid, 1.0);
        let mut init = vec![op.to_sym(&op.profile_field()), op.to_sym(&op.derivative_field(1)), op.to_sym(&op.derivative_field(2))];
        init.push(start_vector(op.grid.len(), 1.3));
        init.push(start_vector(op.grid.len(), 2.1));
        let (lv, _) = lobpcg(&op.matrix, &|r| fd.solve(r), &[], init, 3, 1e-8, 300).unwrap();
        let mut a: Vec<f64> = vals.clone();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let neg = lv[0];
        assert!(neg < 0.0);
        assert!(a.iter().any(|v| (v - lv[1]).abs() < 1e-7), "{a:?} {lv:?}");
    }

    #[test]
    fn small_grid_kernel() {
        let op = small_op();
        let rep = kernel_report(&op, 3).unwrap();
        assert_eq!(rep.cluster_size, 1, "{:?}", rep.eigenvalues);
        assert!(rep.overlaps.tangential[0][0] > 0.99);
        assert!(rep.overlaps.normal[0] < 0.2);
        let full = coercivity_gap(&op, &[]).unwrap();
        assert!((full - rep.eigenvalues[0].abs()).abs() < 1e-8);
        let gap = coercivity_gap(&op, &rep.kernel_vectors).unwrap();
        assert!((gap - rep.gap).abs() < 1e-6 * rep.gap, "{gap} {}", rep.gap);
        assert!(kernel_report(&op, 2).is_err());
    }
}
