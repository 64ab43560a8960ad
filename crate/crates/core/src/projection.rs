//! Orthogonal projection onto `ker A` in the trace inner product.
//!
//! With `W` the diagonal Gram weights of the cone (2 on second-order cone
//! coordinates, 1 elsewhere) the projector is
//! `P = I − W⁻¹Aᵀ(A W⁻¹ Aᵀ)⁻¹A`, which is self-adjoint for `⟨x, y⟩ = xᵀWy`.
//! Rank deficiency is handled by a diagonally pivoted Cholesky factorization
//! of the row-normalized Gram matrix that keeps an independent row subset.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cone::{ConeSpec, Element};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Mat, PivotedCholesky};

/// Relative pivot cutoff for dropping dependent rows.
pub const RANK_DROP_TOL: f64 = 1e-12;

/// `A x = 0, x ∈ int K` with `A` acting on natural coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    spec: ConeSpec,
    a: Mat,
}

impl ProblemInstance {
    pub fn new(spec: ConeSpec, a: Mat) -> Result<Self> {
        if a.cols() != spec.dim() {
            return Err(Error::InvalidInstance(format!(
                "A has {} columns but the cone has dimension {}",
                a.cols(),
                spec.dim()
            )));
        }
        if let Some(pos) = a.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "A entry ({}, {}) is not finite",
                pos / a.cols(),
                pos % a.cols()
            )));
        }
        Ok(ProblemInstance { spec, a })
    }

    pub fn spec(&self) -> &ConeSpec {
        &self.spec
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// `A x` in coordinates.
    pub fn apply(&self, x: &Element) -> Vec<f64> {
        self.a.matvec(x.as_slice())
    }

    /// `A* u = W⁻¹Aᵀu`, the adjoint under the trace inner product.
    pub fn adjoint(&self, u: &[f64]) -> Element {
        let mut y = self.a.matvec_t(u);
        for (v, w) in y.iter_mut().zip(self.spec.gram_weights()) {
            *v /= w;
        }
        Element::from_vec(y)
    }
}

/// Factorized projector onto `ker A`.
#[derive(Debug, Clone)]
pub struct Projector {
    spec: ConeSpec,
    m: usize,
    inv_weights: Vec<f64>,
    /// Retained rows of `A` (normalized), in pivot order.
    kept: Mat,
    /// Original row indices of `kept` and the norms they were divided by.
    rows: Vec<usize>,
    row_norms: Vec<f64>,
    chol: PivotedCholesky,
}

impl Projector {
    pub fn build(inst: &ProblemInstance) -> Projector {
        Projector::from_parts(inst.spec(), inst.a())
    }

    pub fn from_parts(spec: &ConeSpec, a: &Mat) -> Projector {
        assert_eq!(a.cols(), spec.dim());
        let m = a.rows();
        let d = a.cols();
        let inv_weights: Vec<f64> = spec.gram_weights().iter().map(|w| 1.0 / w).collect();

        let mut nonzero = Vec::new();
        let mut norms = Vec::new();
        let mut normalized = Vec::new();
        for i in 0..m {
            let nrm = norm2(a.row(i));
            if nrm > 0.0 {
                nonzero.push(i);
                norms.push(nrm);
                normalized.extend(a.row(i).iter().map(|v| v / nrm));
            }
        }
        let k = nonzero.len();
        let an = Mat::from_row_major(k, d, normalized);
        let mut gram = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let g: f64 = an.row(i).iter().zip(an.row(j)).zip(&inv_weights).map(|((x, y), w)| x * y * w).sum();
                gram[i * k + j] = g;
                gram[j * k + i] = g;
            }
        }
        let chol = PivotedCholesky::factor(k, &gram, RANK_DROP_TOL);
        let mut kept = Vec::with_capacity(chol.rank() * d);
        let mut rows = Vec::with_capacity(chol.rank());
        let mut row_norms = Vec::with_capacity(chol.rank());
        for &p in &chol.pivots {
            kept.extend_from_slice(an.row(p));
            rows.push(nonzero[p]);
            row_norms.push(norms[p]);
        }
        Projector {
            spec: spec.clone(),
            m,
            inv_weights,
            kept: Mat::from_row_major(chol.rank(), d, kept),
            rows,
            row_norms,
            chol,
        }
    }

    /// Number of independent rows retained.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn spec(&self) -> &ConeSpec {
        &self.spec
    }

    /// Solves the normal equations for the retained, normalized rows and
    /// returns `(coefficients, W⁻¹ Ãᵀ coefficients)`.
    fn range_part(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        if self.rank() == 0 {
            return (Vec::new(), vec![0.0; x.len()]);
        }
        let b: Vec<f64> = (0..self.rank()).map(|i| dot(self.kept.row(i), x)).collect();
        let u = self.chol.solve(&b);
        let mut r = self.kept.matvec_t(&u);
        for (v, w) in r.iter_mut().zip(&self.inv_weights) {
            *v *= w;
        }
        (u, r)
    }

    /// `P x`, with one step of iterative refinement.
    pub fn project(&self, x: &Element) -> Element {
        assert_eq!(x.len(), self.spec.dim());
        let mut out = x.as_slice().to_vec();
        for _ in 0..2 {
            let (_, r) = self.range_part(&out);
            out.iter_mut().zip(&r).for_each(|(o, v)| *o -= v);
        }
        Element::from_vec(out)
    }

    /// Least-squares `u` (length `m`) minimizing `‖y − A* u‖` in the trace
    /// norm; dropped rows get coefficient zero.
    pub fn range_coefficients(&self, y: &Element) -> Vec<f64> {
        assert_eq!(y.len(), self.spec.dim());
        let mut u = vec![0.0; self.m];
        let mut resid = y.as_slice().to_vec();
        for _ in 0..2 {
            let (coef, r) = self.range_part(&resid);
            for ((c, row), nrm) in coef.iter().zip(&self.rows).zip(&self.row_norms) {
                u[*row] += c / nrm;
            }
            resid.iter_mut().zip(&r).for_each(|(o, v)| *o -= v);
        }
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Block;

    fn inst(spec: ConeSpec, rows: usize, data: &[f64]) -> ProblemInstance {
        let d = spec.dim();
        ProblemInstance::new(spec, Mat::from_row_major(rows, d, data.to_vec())).unwrap()
    }

    #[test]
    fn rank1_pair_projector() {
        let p = Projector::build(&inst(ConeSpec::nonneg(2).unwrap(), 1, &[1.0, 1.0]));
        let z = p.project(&Element::from_vec(vec![1.0, 0.0]));
        assert!((z.as_slice()[0] - 0.5).abs() < 1e-15);
        assert!((z.as_slice()[1] + 0.5).abs() < 1e-15);
        let z = p.project(&Element::from_vec(vec![1.0, 1.0]));
        assert!(z.as_slice().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_matrix_gives_identity() {
        let spec = ConeSpec::new(vec![Block::Soc(3), Block::Rank1]).unwrap();
        let p = Projector::build(&inst(spec, 2, &[0.0; 8]));
        assert_eq!(p.rank(), 0);
        let x = Element::from_vec(vec![1.0, -2.0, 3.0, 4.0]);
        assert_eq!(p.project(&x), x);
    }

    #[test]
    fn soc_axis_aligned_kernel() {
        let spec = ConeSpec::new(vec![Block::Soc(2)]).unwrap();
        let p = Projector::build(&inst(spec, 1, &[1.0, 0.0]));
        let z = p.project(&Element::from_vec(vec![3.0, -2.0]));
        assert!(z.as_slice()[0].abs() < 1e-15 && z.as_slice()[1] == -2.0);
    }

    #[test]
    fn kernel_points_are_fixed() {
        let p = Projector::build(&inst(ConeSpec::nonneg(3).unwrap(), 1, &[1.0, -1.0, 0.0]));
        let x = Element::from_vec(vec![2.0, 2.0, 5.0]);
        let z = p.project(&x);
        assert!(z.as_slice().iter().zip(x.as_slice()).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn duplicate_rows_are_dropped() {
        let spec = ConeSpec::new(vec![Block::Soc(3), Block::Rank1]).unwrap();
        let a1 = inst(spec.clone(), 1, &[1.0, 2.0, -1.0, 0.5]);
        let a2 = inst(spec, 3, &[1.0, 2.0, -1.0, 0.5, 1.0, 2.0, -1.0, 0.5, -2.0, -4.0, 2.0, -1.0]);
        let (p1, p2) = (Projector::build(&a1), Projector::build(&a2));
        assert_eq!(p2.rank(), 1);
        let x = Element::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        let (z1, z2) = (p1.project(&x), p2.project(&x));
        assert!(z1.as_slice().iter().zip(z2.as_slice()).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn range_coefficients_recover_u() {
        let spec = ConeSpec::new(vec![Block::Soc(3), Block::Rank1, Block::Rank1]).unwrap();
        let i = inst(spec, 2, &[1.0, 0.5, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0, -1.0, 3.0]);
        let u = [0.7, -1.3];
        let y = i.adjoint(&u);
        let got = Projector::build(&i).range_coefficients(&y);
        assert!((got[0] - u[0]).abs() < 1e-13 && (got[1] - u[1]).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_instances() {
        let spec = ConeSpec::nonneg(2).unwrap();
        assert!(ProblemInstance::new(spec.clone(), Mat::zeros(1, 3)).is_err());
        let bad = Mat::from_row_major(1, 2, vec![1.0, f64::NAN]);
        assert!(ProblemInstance::new(spec, bad).is_err());
    }
}
