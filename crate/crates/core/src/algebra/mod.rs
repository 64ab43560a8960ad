//! Euclidean Jordan algebra operations on products of simple blocks.
//!
//! All operations are methods on [`ConeSpec`] and act blockwise on
//! [`Element`]s in natural coordinates:
//!
//! * rank-one blocks: the scalar itself, `x∘y = xy`;
//! * `Soc(n)`: `x = (x₁, x̄)`, `x∘y = (⟨x, y⟩, x₁ȳ + y₁x̄)`, trace inner product
//!   twice the coordinate dot product;
//! * `Psd(n)`: isometrically packed symmetric matrices, `x∘y = (xy + yx)/2`.

mod kernels;

use alloc::vec::Vec;

use crate::cone::{Block, ConeSpec, Element};
use crate::error::{Error, Result};
use crate::linalg::Mat;

pub use kernels::BlockSpectrum;
pub(crate) use kernels::{psd_pack, psd_unpack, square_matmul};

/// Eigenvalues with magnitude at or below this (relative to `max(1, |x_k|∞)`)
/// are treated as zero by `inverse` and `inv_sqrt`.
pub const DEFAULT_TOL_SINGULAR: f64 = 1e-12;

/// Default relative threshold for [`ConeSpec::is_interior`].
pub const DEFAULT_TOL_INTERIOR: f64 = 1e-10;

/// Spectral norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `sqrt(⟨x, x⟩)`, the 2-norm of the eigenvalue vector.
    Two,
    /// Sum of absolute eigenvalues.
    One,
    /// Largest absolute eigenvalue.
    Inf,
    /// Largest block 1-norm.
    OneInf,
    /// Sum of block ∞-norms.
    InfOne,
}

/// Per-block spectral decompositions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub blocks: Vec<BlockSpectrum>,
}

impl ConeSpec {
    fn check2(&self, x: &Element, y: &Element) -> Result<()> {
        self.check(x)?;
        self.check(y)
    }

    fn blockwise(&self, x: &Element, mut f: impl FnMut(usize, Block, &[f64]) -> Result<Vec<f64>>) -> Result<Element> {
        self.check(x)?;
        let mut out = Vec::with_capacity(self.dim());
        for (k, b, r) in self.iter() {
            out.extend(f(k, b, &x.as_slice()[r])?);
        }
        Ok(Element::from_vec(out))
    }

    pub fn jordan_product(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check2(x, y)?;
        let mut out = Vec::with_capacity(self.dim());
        for (_, b, r) in self.iter() {
            out.extend(kernels::product(b, &x.as_slice()[r.clone()], &y.as_slice()[r]));
        }
        Ok(Element::from_vec(out))
    }

    /// Trace inner product `⟨x, y⟩ = tr(x∘y)`.
    pub fn inner(&self, x: &Element, y: &Element) -> Result<f64> {
        self.check2(x, y)?;
        Ok(self.inner_unchecked(x.as_slice(), y.as_slice()))
    }

    pub(crate) fn inner_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.iter()
            .map(|(_, b, r)| b.gram_weight() * crate::linalg::dot(&x[r.clone()], &y[r]))
            .sum()
    }

    /// Norm induced by the trace inner product.
    pub fn norm2(&self, x: &Element) -> f64 {
        libm::sqrt(self.inner_unchecked(x.as_slice(), x.as_slice()))
    }

    pub fn block_inner(&self, k: usize, x: &[f64], y: &[f64]) -> f64 {
        self.block(k).gram_weight() * crate::linalg::dot(x, y)
    }

    pub fn trace(&self, x: &Element) -> Result<f64> {
        self.check(x)?;
        Ok(self.iter().map(|(_, b, r)| kernels::trace(b, &x.as_slice()[r])).sum())
    }

    /// `⟨x_k, e_k⟩`.
    pub fn block_trace(&self, k: usize, x_k: &[f64]) -> f64 {
        kernels::trace(self.block(k), x_k)
    }

    pub fn spectral_decomposition(&self, x: &Element) -> Result<SpectralDecomposition> {
        self.check(x)?;
        let blocks = self
            .iter()
            .map(|(k, b, r)| kernels::spectrum(b, &x.as_slice()[r]).ok_or(Error::NoConvergence { block: k }))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralDecomposition { blocks })
    }

    pub fn block_spectrum(&self, k: usize, x_k: &[f64]) -> Result<BlockSpectrum> {
        kernels::spectrum(self.block(k), x_k).ok_or(Error::NoConvergence { block: k })
    }

    /// Descending eigenvalues of block `k`.
    pub fn block_eigenvalues(&self, k: usize, x_k: &[f64]) -> Result<Vec<f64>> {
        kernels::eigenvalues(self.block(k), x_k).ok_or(Error::NoConvergence { block: k })
    }

    /// Eigenvalues of every block, block by block.
    pub fn eigenvalues(&self, x: &Element) -> Result<Vec<Vec<f64>>> {
        self.check(x)?;
        self.iter().map(|(k, _, r)| self.block_eigenvalues(k, &x.as_slice()[r])).collect()
    }

    /// Smallest eigenvalue of block `k` with its primitive idempotent.
    pub fn block_lambda_min(&self, k: usize, x_k: &[f64]) -> Result<(f64, Vec<f64>)> {
        kernels::min_eigenpair(self.block(k), x_k).ok_or(Error::NoConvergence { block: k })
    }

    /// Global minimum eigenvalue and a primitive idempotent `c` (zero off its
    /// block) with `⟨e, c⟩ = 1` and `⟨x, c⟩ = λ_min(x)`. Ties go to the lowest
    /// block index.
    pub fn lambda_min(&self, x: &Element) -> Result<(f64, Element)> {
        self.check(x)?;
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for (k, _, r) in self.iter() {
            let (lam, c) = self.block_lambda_min(k, &x.as_slice()[r])?;
            if best.as_ref().is_none_or(|(b, _, _)| lam < *b) {
                best = Some((lam, k, c));
            }
        }
        let (lam, k, c) = best.expect("cone has at least one block");
        Ok((lam, self.embed(k, &c)))
    }

    /// Minimum eigenvalue only.
    pub fn lambda_min_value(&self, x: &Element) -> Result<f64> {
        self.check(x)?;
        let mut best = f64::INFINITY;
        for (k, _, r) in self.iter() {
            let ev = self.block_eigenvalues(k, &x.as_slice()[r])?;
            best = best.min(ev.iter().copied().fold(f64::INFINITY, f64::min));
        }
        Ok(best)
    }

    pub fn det(&self, x: &Element) -> Result<f64> {
        Ok(self.eigenvalues(x)?.iter().flatten().product())
    }

    /// `Σ log λᵢ(x)`; fails unless every eigenvalue is positive.
    pub fn log_det(&self, x: &Element) -> Result<f64> {
        let mut acc = 0.0;
        for (k, ev) in self.eigenvalues(x)?.iter().enumerate() {
            acc += log_det_of(k, ev)?;
        }
        Ok(acc)
    }

    pub fn inverse(&self, x: &Element) -> Result<Element> {
        self.blockwise(x, |k, b, xk| {
            guard_singular(k, b, xk)?;
            kernels::spectral_map(b, xk, |l| 1.0 / l).ok_or(Error::NoConvergence { block: k })
        })
    }

    /// `√x`; eigenvalues in `[-tol, 0)` are clamped to zero.
    pub fn sqrt(&self, x: &Element) -> Result<Element> {
        self.blockwise(x, block_sqrt)
    }

    pub fn inv_sqrt(&self, x: &Element) -> Result<Element> {
        self.blockwise(x, block_inv_sqrt)
    }

    pub fn norm(&self, x: &Element, kind: NormKind) -> Result<f64> {
        if kind == NormKind::Two {
            self.check(x)?;
            return Ok(self.norm2(x));
        }
        let ev = self.eigenvalues(x)?;
        let one = |v: &Vec<f64>| v.iter().map(|l| libm::fabs(*l)).sum::<f64>();
        let inf = |v: &Vec<f64>| v.iter().fold(0.0, |m: f64, l| m.max(libm::fabs(*l)));
        Ok(match kind {
            NormKind::Two => unreachable!(),
            NormKind::One => ev.iter().map(one).sum(),
            NormKind::Inf => ev.iter().map(inf).fold(0.0, f64::max),
            NormKind::OneInf => ev.iter().map(one).fold(0.0, f64::max),
            NormKind::InfOne => ev.iter().map(inf).sum(),
        })
    }

    /// `‖x‖₁,∞ = max_k ⟨x_k, e_k⟩`, valid for `x ∈ K`; no eigensolves.
    pub fn cone_norm_one_inf(&self, x: &Element) -> f64 {
        self.iter()
            .map(|(_, b, r)| kernels::trace(b, &x.as_slice()[r]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Blockwise `Q_w(x)`.
    pub fn quad_apply(&self, w: &Element, x: &Element) -> Result<Element> {
        self.check2(w, x)?;
        let mut out = Vec::with_capacity(self.dim());
        for (_, b, r) in self.iter() {
            out.extend(kernels::quad(b, &w.as_slice()[r.clone()], &x.as_slice()[r]));
        }
        Ok(Element::from_vec(out))
    }

    /// Matrix of `Q_a` on the coordinates of block `k`.
    pub fn quad_rep_matrix(&self, k: usize, a: &[f64]) -> Mat {
        let b = self.block(k);
        Mat::from_row_major(b.dim(), b.dim(), kernels::quad_matrix(b, a))
    }

    /// Matrix of `Q_{scale · w_k^{-1/2}}` on block `k` coordinates.
    pub fn quad_matrix(&self, k: usize, w_k: &[f64], scale: f64) -> Result<Mat> {
        if w_k.len() != self.block(k).dim() {
            return Err(Error::Shape { expected: self.block(k).dim(), got: w_k.len() });
        }
        let a: Vec<f64> = block_inv_sqrt(k, self.block(k), w_k)?.iter().map(|v| v * scale).collect();
        Ok(self.quad_rep_matrix(k, &a))
    }

    /// `λ_min(x) > tol · max(1, ‖x‖∞)`.
    pub fn is_interior(&self, x: &Element, tol: f64) -> bool {
        match self.eigenvalues(x) {
            Ok(ev) => {
                let all = ev.iter().flatten();
                let lmin = all.clone().copied().fold(f64::INFINITY, f64::min);
                let linf = all.fold(0.0, |m: f64, l| m.max(libm::fabs(*l)));
                lmin > tol * linf.max(1.0)
            }
            Err(_) => false,
        }
    }

    /// Blockwise `sqrt`/`inv_sqrt`/`inverse` on a single block's coordinates.
    pub fn block_inv_sqrt(&self, k: usize, x_k: &[f64]) -> Result<Vec<f64>> {
        block_inv_sqrt(k, self.block(k), x_k)
    }

    pub fn block_sqrt(&self, k: usize, x_k: &[f64]) -> Result<Vec<f64>> {
        block_sqrt(k, self.block(k), x_k)
    }

    pub fn block_inverse(&self, k: usize, x_k: &[f64]) -> Result<Vec<f64>> {
        let b = self.block(k);
        guard_singular(k, b, x_k)?;
        kernels::spectral_map(b, x_k, |l| 1.0 / l).ok_or(Error::NoConvergence { block: k })
    }

    pub fn block_product(&self, k: usize, x_k: &[f64], y_k: &[f64]) -> Vec<f64> {
        kernels::product(self.block(k), x_k, y_k)
    }

    pub fn block_quad(&self, k: usize, w_k: &[f64], x_k: &[f64]) -> Vec<f64> {
        kernels::quad(self.block(k), w_k, x_k)
    }
}

pub(crate) fn log_det_of(k: usize, ev: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for &l in ev {
        if !(l > 0.0) {
            return Err(Error::NotInterior { block: k, lambda: l });
        }
        acc += libm::log(l);
    }
    Ok(acc)
}

fn spectral_scale(ev: &[f64]) -> f64 {
    ev.iter().fold(1.0, |m: f64, l| m.max(libm::fabs(*l)))
}

fn guard_singular(k: usize, b: Block, xk: &[f64]) -> Result<()> {
    let ev = kernels::eigenvalues(b, xk).ok_or(Error::NoConvergence { block: k })?;
    let tol = DEFAULT_TOL_SINGULAR * spectral_scale(&ev);
    match ev.iter().find(|l| libm::fabs(**l) <= tol) {
        Some(l) => Err(Error::Singular { block: k, lambda: *l }),
        None => Ok(()),
    }
}

fn block_sqrt(k: usize, b: Block, xk: &[f64]) -> Result<Vec<f64>> {
    let ev = kernels::eigenvalues(b, xk).ok_or(Error::NoConvergence { block: k })?;
    let tol = DEFAULT_TOL_SINGULAR * spectral_scale(&ev);
    if let Some(l) = ev.iter().find(|l| **l < -tol) {
        return Err(Error::NotInterior { block: k, lambda: *l });
    }
    kernels::spectral_map(b, xk, |l| libm::sqrt(l.max(0.0))).ok_or(Error::NoConvergence { block: k })
}

fn block_inv_sqrt(k: usize, b: Block, xk: &[f64]) -> Result<Vec<f64>> {
    let ev = kernels::eigenvalues(b, xk).ok_or(Error::NoConvergence { block: k })?;
    let tol = DEFAULT_TOL_SINGULAR * spectral_scale(&ev);
    if let Some(l) = ev.iter().find(|l| **l <= tol) {
        return Err(Error::NotInterior { block: k, lambda: *l });
    }
    kernels::spectral_map(b, xk, |l| 1.0 / libm::sqrt(l)).ok_or(Error::NoConvergence { block: k })
}
