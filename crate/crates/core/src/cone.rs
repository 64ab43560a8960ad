use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// A simple symmetric cone.
///
/// `Soc(n)` is the Lorentz cone in `ℝⁿ`; `Psd(n)` is the cone of `n × n`
/// positive semidefinite matrices stored as the `n(n+1)/2` upper-triangle
/// entries in column-major order with off-diagonals scaled by `√2`, so the
/// block's Euclidean dot product is the trace inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    Rank1,
    Soc(usize),
    Psd(usize),
}

impl Block {
    pub fn rank(&self) -> usize {
        match *self {
            Block::Rank1 => 1,
            Block::Soc(_) => 2,
            Block::Psd(n) => n,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Block::Rank1 => 1,
            Block::Soc(n) => n,
            Block::Psd(n) => n * (n + 1) / 2,
        }
    }

    /// Ratio between the trace inner product and the coordinate dot product.
    pub fn gram_weight(&self) -> f64 {
        match self {
            Block::Soc(_) => 2.0,
            _ => 1.0,
        }
    }

    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        match *self {
            Block::Rank1 | Block::Soc(_) => e[0] = 1.0,
            Block::Psd(n) => (0..n).for_each(|i| e[psd_index(i, i)] = 1.0),
        }
        e
    }
}

/// Position of entry `(i, j)` of a symmetric matrix in the packed
/// column-major upper triangle.
#[inline]
pub(crate) fn psd_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

/// Ordered product of simple blocks `K₁ × ⋯ × K_ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSpec {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    dim: usize,
    rank: usize,
    rank_max: usize,
}

impl ConeSpec {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidCone("a cone needs at least one block".into()));
        }
        for (k, b) in blocks.iter().enumerate() {
            match *b {
                Block::Soc(n) if n < 2 => {
                    return Err(Error::InvalidCone(format!("block {k}: second-order cone needs dim ≥ 2, got {n}")))
                }
                Block::Psd(0) => return Err(Error::InvalidCone(format!("block {k}: psd block needs order ≥ 1"))),
                _ => {}
            }
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            acc += b.dim();
        }
        offsets.push(acc);
        let rank = blocks.iter().map(Block::rank).sum();
        let rank_max = blocks.iter().map(Block::rank).max().unwrap_or(0);
        Ok(ConeSpec { blocks, offsets, dim: acc, rank, rank_max })
    }

    /// `ℝ₊ⁿ` as `n` rank-one blocks.
    pub fn nonneg(n: usize) -> Result<Self> {
        ConeSpec::new(vec![Block::Rank1; n])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> Block {
        self.blocks[k]
    }

    /// Number of simple blocks `ℓ`.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_max(&self) -> usize {
        self.rank_max
    }

    pub fn range(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn check(&self, x: &Element) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Shape { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    pub fn zeros(&self) -> Element {
        Element(vec![0.0; self.dim])
    }

    /// The identity element `e`.
    pub fn identity(&self) -> Element {
        let mut v = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            v.extend(b.identity());
        }
        Element(v)
    }

    /// Per-coordinate weights `W` with `⟨x, y⟩ = Σ Wᵢ xᵢ yᵢ`.
    pub fn gram_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            w.extend(core::iter::repeat_n(b.gram_weight(), b.dim()));
        }
        w
    }

    /// Iterator over `(block index, block, coordinate range)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Block, Range<usize>)> + '_ {
        self.blocks.iter().enumerate().map(move |(k, b)| (k, *b, self.range(k)))
    }

    /// Element that is `block` on block `k` and zero elsewhere.
    pub fn embed(&self, k: usize, block: &[f64]) -> Element {
        let mut x = self.zeros();
        x.0[self.range(k)].copy_from_slice(block);
        x
    }
}

/// Block-structured coordinate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Element(pub(crate) Vec<f64>);

impl Element {
    pub fn from_vec(v: Vec<f64>) -> Self {
        Element(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn block<'a>(&'a self, spec: &ConeSpec, k: usize) -> &'a [f64] {
        &self.0[spec.range(k)]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, a: f64) -> Element {
        Element(self.0.iter().map(|v| a * v).collect())
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &Element, b: f64) -> Element {
        debug_assert_eq!(self.len(), other.len());
        Element(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect())
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.axpby(1.0, other, -1.0)
    }

    pub fn add(&self, other: &Element) -> Element {
        self.axpby(1.0, other, 1.0)
    }
}

impl From<Vec<f64>> for Element {
    fn from(v: Vec<f64>) -> Self {
        Element(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_totals() {
        let spec = ConeSpec::new(vec![Block::Rank1, Block::Soc(3), Block::Psd(3)]).unwrap();
        assert_eq!(spec.num_blocks(), 3);
        assert_eq!(spec.rank(), 1 + 2 + 3);
        assert_eq!(spec.dim(), 1 + 3 + 6);
        assert_eq!(spec.rank_max(), 3);
        assert_eq!(spec.range(2), 4..10);
    }

    #[test]
    fn rejects_degenerate_blocks() {
        assert!(ConeSpec::new(vec![]).is_err());
        assert!(ConeSpec::new(vec![Block::Soc(1)]).is_err());
        assert!(ConeSpec::new(vec![Block::Psd(0)]).is_err());
    }

    #[test]
    fn psd_packing_order() {
        assert_eq!(psd_index(0, 0), 0);
        assert_eq!(psd_index(0, 1), 1);
        assert_eq!(psd_index(1, 1), 2);
        assert_eq!(psd_index(0, 2), 3);
        assert_eq!(psd_index(2, 1), 4);
        assert_eq!(psd_index(2, 2), 5);
        assert_eq!(Block::Psd(3).identity(), vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    }
}
