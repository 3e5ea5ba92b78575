//! Compressed sparse rows for matrix-vector products and a thin wrapper
//! over faer's sparse LU / Cholesky for solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl Csr {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Csr {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut data: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        Csr { n, indptr, indices, data }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            y[i] = s;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.data[self.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `a * self + diag(d)`, keeping the sparsity pattern (the diagonal is
    /// assumed present).
    pub fn scaled_plus_diag(&self, a: f64, d: &[f64]) -> Csr {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in out.indptr[i]..out.indptr[i + 1] {
                out.data[k] *= a;
                if out.indices[k] == i {
                    out.data[k] += d[i];
                }
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                m = m.max((self.data[k] - self.get(j, i)).abs());
            }
        }
        m
    }

    fn to_faer(&self, lower_only: bool) -> Result<SparseColMat<usize, f64>> {
        let mut t = Vec::with_capacity(self.data.len());
        for i in 0..self.n {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let j = self.indices[k];
                if lower_only && j > i {
                    continue;
                }
                t.push(Triplet::new(i, j, self.data[k]));
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &t)
            .map_err(|e| Error::LinearSolveFailed(format!("{e:?}")))
    }

    /// General LU factorization.
    pub fn lu(&self) -> Result<Factor> {
        init_parallelism();
        let a = self.to_faer(false)?;
        let lu = a.sp_lu().map_err(|e| Error::LinearSolveFailed(format!("{e:?}")))?;
        Ok(Factor::Lu(lu))
    }

    /// Cholesky factorization of a symmetric positive definite matrix.
    pub fn cholesky(&self) -> Result<Factor> {
        init_parallelism();
        let a = self.to_faer(true)?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::LinearSolveFailed(format!("{e:?}")))?;
        Ok(Factor::Llt(llt))
    }
}

fn init_parallelism() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

pub enum Factor {
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
    Llt(faer::sparse::linalg::solvers::Llt<usize, f64>),
}

impl Factor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        match self {
            Factor::Lu(f) => f.solve_in_place(m.as_mut()),
            Factor::Llt(f) => f.solve_in_place(m.as_mut()),
        }
        (0..b.len()).map(|i| m[(i, 0)]).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
