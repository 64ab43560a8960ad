//! Small dense linear algebra: row-major matrices, a cyclic Jacobi
//! symmetric eigensolver and a diagonally pivoted Cholesky factorization.
//!
//! Everything here is sized for desk-scale problems (dimensions in the low
//! hundreds) and is fully deterministic.

use alloc::vec;
use alloc::vec::Vec;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major buffer has the wrong length");
        Mat { rows, cols, data }
    }

    /// Builds a matrix column by column.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        let cols = columns.len();
        let mut m = Mat::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `selfᵀ · x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for (i, xi) in x.iter().enumerate() {
            if *xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| f64::max(m, libm::fabs(a - b)))
    }

    pub fn determinant(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in k + 1..n {
                if libm::fabs(a[i * n + k]) > libm::fabs(a[piv * n + k]) {
                    piv = i;
                }
            }
            if a[piv * n + k] == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[k * n + k];
            det *= p;
            for i in k + 1..n {
                let f = a[i * n + k] / p;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        det
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Eigen-decomposition of a symmetric matrix.
///
/// Eigenvalues are sorted in descending order and `vectors[i]` is the unit
/// eigenvector belonging to `values[i]`, with its first non-negligible
/// component made positive.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

const JACOBI_MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigensolver for the symmetric `n × n` matrix stored
/// row-major in `a` (only the symmetric part is used).
///
/// Returns `None` if the off-diagonal mass does not vanish within the sweep
/// budget.
pub fn sym_eigen(n: usize, a: &[f64]) -> Option<SymEigen> {
    assert_eq!(a.len(), n * n);
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = m.iter().map(|x| x * x).sum();
    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        if off <= 1e-30 * total || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = {
                    let s = if theta >= 0.0 { 1.0 } else { -1.0 };
                    s / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return None;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            let mut col: Vec<f64> = (0..n).map(|k| v[k * n + j]).collect();
            let big = col.iter().fold(0.0, |acc: f64, x| acc.max(libm::fabs(*x)));
            if let Some(first) = col.iter().find(|x| libm::fabs(**x) > 1e-12 * big) {
                if *first < 0.0 {
                    col.iter_mut().for_each(|x| *x = -*x);
                }
            }
            col
        })
        .collect();
    Some(SymEigen { values, vectors })
}

/// Cholesky factor `L` (lower, row-major) of a symmetric positive definite
/// matrix restricted to a pivot subset.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    /// Original indices of the retained pivots, in factorization order.
    pub pivots: Vec<usize>,
    /// Lower-triangular factor of the Gram matrix restricted to `pivots`
    /// (in pivot order), `k × k` row-major.
    pub factor: Vec<f64>,
}

impl PivotedCholesky {
    /// Diagonally pivoted Cholesky of the symmetric positive semidefinite
    /// `n × n` matrix `g`. Pivoting stops once the largest remaining diagonal
    /// drops to `drop_tol` times the largest initial diagonal entry.
    #[allow(clippy::needless_range_loop)]
    pub fn factor(n: usize, g: &[f64], drop_tol: f64) -> Self {
        assert_eq!(g.len(), n * n);
        let mut a = g.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let max_diag = (0..n).fold(0.0, |m: f64, i| m.max(g[i * n + i]));
        let cutoff = drop_tol * max_diag;
        let mut k = 0;
        while k < n {
            let (piv, dmax) = (k..n)
                .map(|i| (i, a[perm[i] * n + perm[i]]))
                .fold((k, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(dmax > cutoff) || dmax <= 0.0 {
                break;
            }
            perm.swap(k, piv);
            let pk = perm[k];
            let lkk = libm::sqrt(dmax);
            a[pk * n + pk] = lkk;
            for i in k + 1..n {
                let pi = perm[i];
                a[pi * n + pk] /= lkk;
            }
            for i in k + 1..n {
                let pi = perm[i];
                let lik = a[pi * n + pk];
                for j in k + 1..=i {
                    let pj = perm[j];
                    let ljk = a[pj * n + pk];
                    a[pi * n + pj] -= lik * ljk;
                    if i != j {
                        a[pj * n + pi] = a[pi * n + pj];
                    }
                }
            }
            k += 1;
        }
        let pivots: Vec<usize> = perm[..k].to_vec();
        let mut factor = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                factor[i * k + j] = a[pivots[i] * n + pivots[j]];
            }
        }
        PivotedCholesky { pivots, factor }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Solves `(L Lᵀ) x = b` for `b` given in pivot order.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.rank();
        assert_eq!(b.len(), k);
        let l = &self.factor;
        let mut y = b.to_vec();
        for i in 0..k {
            let mut s = y[i];
            for j in 0..i {
                s -= l[i * k + j] * y[j];
            }
            y[i] = s / l[i * k + i];
        }
        for i in (0..k).rev() {
            let mut s = y[i];
            for j in i + 1..k {
                s -= l[j * k + i] * y[j];
            }
            y[i] = s / l[i * k + i];
        }
        y
    }
}
