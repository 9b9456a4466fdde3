//! Real symmetric eigenproblems: dense Householder + implicit QL, a CSR
//! sparse matrix and a Lanczos ground-state solver with full
//! reorthogonalization.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, hypot, sqrt};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("QL iteration did not converge")]
    QlNoConvergence,
    #[error("Lanczos did not converge after {iterations} iterations (residual {residual:e})")]
    LanczosNoConvergence { iterations: usize, residual: f64 },
    #[error("empty matrix")]
    Empty,
}

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseSym {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }
}

/// Eigenvalues in ascending order with eigenvectors as columns
/// (`vectors[k * n + i]` is component `k` of eigenvector `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
    pub n: usize,
}

impl SymEigen {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        (0..self.n).map(|k| self.vectors[k * self.n + i]).collect()
    }
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn symmetric_eigen(a: &DenseSym) -> Result<SymEigen, LinalgError> {
    let n = a.n;
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    let mut v = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    Ok(sorted(n, d, v))
}

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<SymEigen, LinalgError> {
    let n = diag.len();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    debug_assert_eq!(off.len() + 1, n);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    tql2(n, &mut v, &mut d, &mut e)?;
    Ok(sorted(n, d, v))
}

fn sorted(n: usize, d: Vec<f64>, v: Vec<f64>) -> SymEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    SymEigen { values, vectors, n }
}

/// Householder reduction to tridiagonal form, accumulating the transform in `v`.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for x in &d[..i] {
            scale += fabs(*x);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on a tridiagonal matrix (`d` diagonal, `e[1..]` sub-diagonal),
/// rotating the columns of `v`.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    let at = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(fabs(d[l]) + fabs(e[l]));
        let mut m = l;
        while m < n {
            if fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(LinalgError::QlNoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v[at(k, i + 1)];
                        v[at(k, i + 1)] = s * v[at(k, i)] + c * hk;
                        v[at(k, i)] = c * v[at(k, i)] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(fabs(e[l]) > eps * tst1) {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed in
    /// ascending column order within each row.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(fabs(*v)))
    }

    pub fn to_dense(&self) -> DenseSym {
        let mut d = DenseSym::zeros(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d.set(i, j, v);
            }
        }
        d
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Lowest eigenpair and its relative residual `‖Hv − e₀v‖/scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundEigen {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Residual scale: `|e₀|`, falling back to the largest matrix entry when
/// the ground energy vanishes.
fn residual_of(h: &CsrMatrix, energy: f64, vector: &[f64]) -> f64 {
    let mut hv = vec![0.0; h.n];
    h.matvec(vector, &mut hv);
    let r: Vec<f64> = hv.iter().zip(vector).map(|(a, b)| a - energy * b).collect();
    let scale = fabs(energy).max(h.max_abs()).max(f64::MIN_POSITIVE);
    norm(&r) / scale
}

pub fn ground_dense(h: &CsrMatrix) -> Result<GroundEigen, LinalgError> {
    let eig = symmetric_eigen(&h.to_dense())?;
    let vector = eig.vector(0);
    let energy = eig.values[0];
    let residual = residual_of(h, energy, &vector);
    Ok(GroundEigen { energy, vector, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Ritz residual bound relative to `|θ₀|` at which iteration stops.
    pub tol: f64,
    /// Iterations between Ritz checks.
    pub check_every: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_iter: 400, tol: 1e-13, check_every: 5 }
    }
}

/// Deterministic start vector with strictly positive entries.
fn start_vector(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n as u64)
        .map(|i| {
            let h = i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11;
            1.0 + 0.5 * (h as f64 / (1u64 << 53) as f64)
        })
        .collect();
    let s = 1.0 / norm(&v);
    v.iter_mut().for_each(|x| *x *= s);
    v
}

/// Lowest eigenpair by Lanczos with full (twice-applied Gram-Schmidt)
/// reorthogonalization.
pub fn ground_lanczos(h: &CsrMatrix, opts: &LanczosOptions) -> Result<GroundEigen, LinalgError> {
    let n = h.n;
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    let max_iter = opts.max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut alpha: Vec<f64> = Vec::with_capacity(max_iter);
    let mut beta: Vec<f64> = Vec::with_capacity(max_iter);
    basis.push(start_vector(n));
    let mut w = vec![0.0; n];
    let mut last_estimate = f64::INFINITY;

    for j in 0..max_iter {
        h.matvec(&basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        let size = j + 1;
        let exhausted = b <= 1e-14 * alpha.iter().fold(0.0f64, |m, x| m.max(fabs(*x))).max(1e-300) || size == n;
        let check = exhausted || size % opts.check_every == 0 || size == max_iter;
        if check {
            let t = tridiagonal_eigen(&alpha, &beta)?;
            let theta = t.values[0];
            let s_last = t.vectors[(size - 1) * size];
            let estimate = fabs(b * s_last);
            last_estimate = estimate;
            if exhausted || estimate <= opts.tol * fabs(theta).max(f64::MIN_POSITIVE) {
                let mut vector = vec![0.0; n];
                for (k, q) in basis.iter().enumerate() {
                    let sk = t.vectors[k * size];
                    for (vi, qi) in vector.iter_mut().zip(q) {
                        *vi += sk * qi;
                    }
                }
                let s = 1.0 / norm(&vector);
                vector.iter_mut().for_each(|x| *x *= s);
                let residual = residual_of(h, theta, &vector);
                return Ok(GroundEigen { energy: theta, vector, residual });
            }
        }
        if size == max_iter {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(LinalgError::LanczosNoConvergence { iterations: max_iter, residual: last_estimate })
}
