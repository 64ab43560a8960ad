//! Semidefinite specialization on full `n × n` matrices.
//!
//! Constraints are `tr(a_i x) = 0`, the projector works through the Gram
//! matrix `tr(a_i a_j)`, quadratic maps are `w x w`, and a rescaling replaces
//! every `a_i` by `n w^{-1/2} a_i w^{-1/2}`. This path shares no Jordan
//! algebra code with the generic solver and serves as a cross-check of it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{psd_pack, psd_unpack, square_matmul};
use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eigen, Mat, PivotedCholesky};
use crate::projection::RANK_DROP_TOL;
use crate::solver::SolverConfig;

/// Full row-major matrix from isometric packed coordinates.
pub fn unpack(n: usize, packed: &[f64]) -> Vec<f64> {
    psd_unpack(n, packed)
}

/// Isometric packed coordinates of a symmetric matrix.
pub fn pack(n: usize, full: &[f64]) -> Vec<f64> {
    psd_pack(n, full)
}

/// Converts a packed constraint row `a` to the matrix `a_mat` with
/// `tr(a_mat X) = a · pack(X)`: diagonal `a_ii`, off-diagonals `a_iso / √2`.
pub fn row_to_matrix(n: usize, packed_row: &[f64]) -> Vec<f64> {
    unpack(n, packed_row)
}

fn frob(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    (0..n).for_each(|i| m[i * n + i] = 1.0);
    m
}

fn trace(n: usize, a: &[f64]) -> f64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

/// `f` applied to the eigenvalues of symmetric `a`.
fn spectral(n: usize, a: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let eig = sym_eigen(n, a).ok_or(Error::NoConvergence { block: 0 })?;
    let mut out = vec![0.0; n * n];
    for (l, v) in eig.values.iter().zip(&eig.vectors) {
        let fl = f(*l);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += fl * v[i] * v[j];
            }
        }
    }
    Ok(out)
}

/// Orthogonal projector onto `{x : tr(a_i x) = 0}` in the Frobenius product.
#[derive(Debug, Clone)]
struct MatrixProjector {
    rows: Vec<Vec<f64>>,
    chol: PivotedCholesky,
}

impl MatrixProjector {
    fn new(rows: &[Vec<f64>]) -> Self {
        let m = rows.len();
        let mut gram = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let g = dot(&rows[i], &rows[j]);
                gram[i * m + j] = g;
                gram[j * m + i] = g;
            }
        }
        let chol = PivotedCholesky::factor(m, &gram, RANK_DROP_TOL);
        let rows = chol.pivots.iter().map(|&p| rows[p].clone()).collect();
        MatrixProjector { rows, chol }
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for _ in 0..2 {
            if self.rows.is_empty() {
                break;
            }
            let b: Vec<f64> = self.rows.iter().map(|a| dot(a, &out)).collect();
            let u = self.chol.solve(&b);
            for (ui, a) in u.iter().zip(&self.rows) {
                out.iter_mut().zip(a).for_each(|(o, v)| *o -= ui * v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SdpBasicOutcome {
    Primal { z: Vec<f64> },
    Dual { c: Vec<f64> },
    Threshold { y: Vec<f64>, z: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpIteration {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub rho: f64,
    pub w: Vec<f64>,
    pub delta: f64,
    pub eps_ledger: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SdpStep {
    Rescaled(SdpIteration),
    Finished(SdpBasicOutcome),
    EpsilonInfeasible { eps_ledger: f64 },
}

/// Stepwise solver for `tr(a_i x) = 0, x ≻ 0` with full matrix iterates.
#[derive(Debug, Clone)]
pub struct SdpSolver {
    n: usize,
    rows: Vec<Vec<f64>>,
    cfg: SolverConfig,
    eps_ledger: f64,
}

impl SdpSolver {
    /// `rows` are full symmetric `n × n` matrices in row-major order.
    pub fn new(n: usize, rows: Vec<Vec<f64>>, cfg: &SolverConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCone("matrix order must be positive".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != n * n) {
            return Err(Error::Shape { expected: n * n, got: r.len() });
        }
        let mut s = SdpSolver { n, rows, cfg: cfg.clone(), eps_ledger: 0.0 };
        s.normalize_rows();
        Ok(s)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    fn normalize_rows(&mut self) {
        for r in &mut self.rows {
            let nrm = frob(r);
            if nrm > 0.0 {
                r.iter_mut().for_each(|v| *v /= nrm);
            }
        }
    }

    fn is_pd(&self, x: &[f64]) -> Result<bool> {
        let eig = sym_eigen(self.n, x).ok_or(Error::NoConvergence { block: 0 })?;
        let scale = eig.values.iter().fold(1.0f64, |m, l| m.max(libm::fabs(*l)));
        Ok(eig.values[self.n - 1] > self.cfg.tol_int * scale)
    }

    pub fn basic(&self) -> Result<SdpBasicOutcome> {
        let n = self.n;
        let nf = n as f64;
        let proj = MatrixProjector::new(&self.rows);
        let budget = self.cfg.bp_budget(&crate::ConeSpec::new(vec![crate::Block::Psd(n)])?);
        let tol_zero = self.cfg.tol_zero;

        let mut y: Vec<f64> = identity(n).iter().map(|v| v / nf).collect();
        let mut z = proj.project(&y);
        for _ in 0..=budget {
            if frob(&z) <= tol_zero * frob(&y).max(1.0) {
                return Ok(SdpBasicOutcome::Dual { c: y });
            }
            if self.is_pd(&z)? {
                return Ok(SdpBasicOutcome::Primal { z });
            }
            if frob(&z) <= trace(n, &y) / (2.0 * nf) {
                return Ok(SdpBasicOutcome::Threshold { y, z });
            }
            let eig = sym_eigen(n, &z).ok_or(Error::NoConvergence { block: 0 })?;
            let v = &eig.vectors[n - 1];
            let c: Vec<f64> = (0..n * n).map(|ij| v[ij / n] * v[ij % n]).collect();
            let p = proj.project(&c);
            if frob(&p) <= tol_zero * frob(&c).max(1.0) {
                return Ok(SdpBasicOutcome::Dual { c });
            }
            if self.is_pd(&p)? {
                return Ok(SdpBasicOutcome::Primal { z: p });
            }
            if frob(&p) <= 1.0 / (2.0 * nf) {
                return Ok(SdpBasicOutcome::Threshold { y: c, z: p });
            }
            let zp: Vec<f64> = z.iter().zip(&p).map(|(a, b)| a - b).collect();
            let alpha = -dot(&p, &zp) / dot(&zp, &zp);
            y = y.iter().zip(&c).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
            let t = trace(n, &y);
            y.iter_mut().for_each(|v| *v /= t);
            z = proj.project(&y);
        }
        Err(Error::Precondition(format!("basic procedure exceeded {budget} updates")))
    }

    pub fn step(&mut self) -> Result<SdpStep> {
        let n = self.n;
        let nf = n as f64;
        let (y, z) = match self.basic()? {
            SdpBasicOutcome::Threshold { y, z } => (y, z),
            done => return Ok(SdpStep::Finished(done)),
        };
        let ty = trace(n, &y);
        let rho = ty / (nf * frob(&z));
        let beta = nf - (1.0 / rho - 1.0 / libm::sqrt(rho * (3.0 * rho - 2.0)));
        let w: Vec<f64> = y
            .iter()
            .zip(identity(n))
            .map(|(yv, e)| (nf - beta) / ty * rho * nf * yv + beta * e)
            .collect();
        let eig = sym_eigen(n, &w).ok_or(Error::NoConvergence { block: 0 })?;
        if eig.values[n - 1] <= 0.0 {
            return Err(Error::NotInterior { block: 0, lambda: eig.values[n - 1] });
        }
        let log_det: f64 = eig.values.iter().map(|l| libm::log(*l)).sum();
        let delta = libm::log(nf) - log_det / nf;
        self.eps_ledger += delta;
        if self.eps_ledger < libm::log(nf) + libm::log(self.cfg.eps) {
            return Ok(SdpStep::EpsilonInfeasible { eps_ledger: self.eps_ledger });
        }

        let w_is = spectral(n, &w, |l| 1.0 / libm::sqrt(l))?;
        for a in &mut self.rows {
            let t = square_matmul(n, &square_matmul(n, &w_is, a), &w_is);
            *a = t.iter().map(|v| nf * v).collect();
            // keep exact symmetry
            for i in 0..n {
                for j in 0..i {
                    let s = 0.5 * (a[i * n + j] + a[j * n + i]);
                    a[i * n + j] = s;
                    a[j * n + i] = s;
                }
            }
        }
        self.normalize_rows();
        Ok(SdpStep::Rescaled(SdpIteration { y, z, rho, w, delta, eps_ledger: self.eps_ledger }))
    }
}

/// Matrix rows of a packed single-PSD-block constraint matrix.
pub fn rows_from_packed(n: usize, a: &Mat) -> Result<Vec<Vec<f64>>> {
    if a.cols() != n * (n + 1) / 2 {
        return Err(Error::Shape { expected: n * (n + 1) / 2, got: a.cols() });
    }
    Ok((0..a.rows()).map(|i| row_to_matrix(n, a.row(i))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_conversion_preserves_pairing() {
        let n = 3;
        let row = [1.0, 2.0, -1.0, 0.5, 3.0, 0.25];
        let x = [2.0, 0.7, 1.0, -0.3, 0.9, 4.0];
        let a = row_to_matrix(n, &row);
        let xm = unpack(n, &x);
        assert!((dot(&a, &xm) - dot(&row, &x)).abs() < 1e-14);
        assert_eq!(pack(n, &unpack(n, &x)).len(), 6);
    }

    #[test]
    fn projector_kills_constraints() {
        let rows = vec![vec![1.0, 0.0, 0.0, -1.0], vec![0.0, 1.0, 1.0, 0.0]];
        let p = MatrixProjector::new(&rows);
        let z = p.project(&[3.0, 1.0, 1.0, 2.0]);
        assert!(rows.iter().all(|a| dot(a, &z).abs() < 1e-14));
        assert!((z[0] - 2.5).abs() < 1e-14 && (z[3] - 2.5).abs() < 1e-14);
    }

    #[test]
    fn traceless_constraint_is_primal() {
        let rows = vec![vec![1.0, 0.0, 0.0, -1.0]];
        let mut s = SdpSolver::new(2, rows, &SolverConfig::default()).unwrap();
        assert!(matches!(s.step().unwrap(), SdpStep::Finished(SdpBasicOutcome::Primal { .. })));
    }

    #[test]
    fn identity_constraint_is_dual() {
        let rows = vec![vec![1.0, 0.0, 0.0, 1.0]];
        let mut s = SdpSolver::new(2, rows, &SolverConfig::default()).unwrap();
        assert!(matches!(s.step().unwrap(), SdpStep::Finished(SdpBasicOutcome::Dual { .. })));
    }
}
