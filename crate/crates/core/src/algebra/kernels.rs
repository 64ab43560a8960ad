//! Per-block Jordan algebra kernels operating on coordinate slices.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::cone::{psd_index, Block};
use crate::linalg::{dot, norm2, sym_eigen};

/// Eigenvalues (descending) and matching Jordan frame of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub values: Vec<f64>,
    pub frames: Vec<Vec<f64>>,
}

pub(crate) fn psd_unpack(n: usize, x: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..=j {
            let v = x[psd_index(i, j)];
            if i == j {
                m[i * n + i] = v;
            } else {
                m[i * n + j] = v / SQRT_2;
                m[j * n + i] = v / SQRT_2;
            }
        }
    }
    m
}

/// Packs the symmetric part of the row-major `n × n` matrix `m`.
pub(crate) fn psd_pack(n: usize, m: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n * (n + 1) / 2];
    for j in 0..n {
        for i in 0..=j {
            x[psd_index(i, j)] = if i == j {
                m[i * n + i]
            } else {
                SQRT_2 * 0.5 * (m[i * n + j] + m[j * n + i])
            };
        }
    }
    x
}

pub(crate) fn square_matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Packed rank-one idempotent `v vᵀ` for a unit vector `v`.
pub(crate) fn psd_outer(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = v[i] * v[j];
        }
    }
    psd_pack(n, &m)
}

pub(crate) fn product(block: Block, x: &[f64], y: &[f64]) -> Vec<f64> {
    match block {
        Block::Rank1 => vec![x[0] * y[0]],
        Block::Soc(_) => {
            let mut out = Vec::with_capacity(x.len());
            out.push(dot(x, y));
            out.extend(x[1..].iter().zip(&y[1..]).map(|(xb, yb)| x[0] * yb + y[0] * xb));
            out
        }
        Block::Psd(n) => {
            let xm = psd_unpack(n, x);
            let ym = psd_unpack(n, y);
            let xy = square_matmul(n, &xm, &ym);
            // pack symmetrizes, giving (xy + yx)/2
            psd_pack(n, &xy)
        }
    }
}

pub(crate) fn trace(block: Block, x: &[f64]) -> f64 {
    match block {
        Block::Rank1 => x[0],
        Block::Soc(_) => 2.0 * x[0],
        Block::Psd(n) => (0..n).map(|i| x[psd_index(i, i)]).sum(),
    }
}

fn soc_direction(x: &[f64]) -> (f64, Vec<f64>) {
    let nb = norm2(&x[1..]);
    let dir = if nb == 0.0 {
        let mut z = vec![0.0; x.len() - 1];
        z[0] = 1.0;
        z
    } else {
        x[1..].iter().map(|v| v / nb).collect()
    };
    (nb, dir)
}

fn soc_frame(dir: &[f64], sign: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(dir.len() + 1);
    c.push(0.5);
    c.extend(dir.iter().map(|d| 0.5 * sign * d));
    c
}

/// Full spectral decomposition; `None` when the eigensolver fails.
pub(crate) fn spectrum(block: Block, x: &[f64]) -> Option<BlockSpectrum> {
    match block {
        Block::Rank1 => Some(BlockSpectrum { values: vec![x[0]], frames: vec![vec![1.0]] }),
        Block::Soc(_) => {
            let (nb, dir) = soc_direction(x);
            Some(BlockSpectrum {
                values: vec![x[0] + nb, x[0] - nb],
                frames: vec![soc_frame(&dir, 1.0), soc_frame(&dir, -1.0)],
            })
        }
        Block::Psd(n) => {
            let eig = sym_eigen(n, &psd_unpack(n, x))?;
            let frames = eig.vectors.iter().map(|v| psd_outer(v)).collect();
            Some(BlockSpectrum { values: eig.values, frames })
        }
    }
}

pub(crate) fn eigenvalues(block: Block, x: &[f64]) -> Option<Vec<f64>> {
    match block {
        Block::Rank1 => Some(vec![x[0]]),
        Block::Soc(_) => {
            let nb = norm2(&x[1..]);
            Some(vec![x[0] + nb, x[0] - nb])
        }
        Block::Psd(n) => sym_eigen(n, &psd_unpack(n, x)).map(|e| e.values),
    }
}

/// Smallest eigenvalue and its primitive idempotent.
pub(crate) fn min_eigenpair(block: Block, x: &[f64]) -> Option<(f64, Vec<f64>)> {
    match block {
        Block::Rank1 => Some((x[0], vec![1.0])),
        Block::Soc(_) => {
            let (nb, dir) = soc_direction(x);
            Some((x[0] - nb, soc_frame(&dir, -1.0)))
        }
        Block::Psd(n) => {
            let eig = sym_eigen(n, &psd_unpack(n, x))?;
            let last = n - 1;
            Some((eig.values[last], psd_outer(&eig.vectors[last])))
        }
    }
}

/// `Σ f(λᵢ) cᵢ`.
pub(crate) fn spectral_map(block: Block, x: &[f64], f: impl Fn(f64) -> f64) -> Option<Vec<f64>> {
    match block {
        Block::Rank1 => Some(vec![f(x[0])]),
        Block::Soc(_) => {
            let (nb, dir) = soc_direction(x);
            let (f1, f2) = (f(x[0] + nb), f(x[0] - nb));
            let mut out = Vec::with_capacity(x.len());
            out.push(0.5 * (f1 + f2));
            out.extend(dir.iter().map(|d| 0.5 * (f1 - f2) * d));
            Some(out)
        }
        Block::Psd(n) => {
            let eig = sym_eigen(n, &psd_unpack(n, x))?;
            let mut m = vec![0.0; n * n];
            for (lam, v) in eig.values.iter().zip(&eig.vectors) {
                let fl = f(*lam);
                for i in 0..n {
                    for j in 0..n {
                        m[i * n + j] += fl * v[i] * v[j];
                    }
                }
            }
            Some(psd_pack(n, &m))
        }
    }
}

/// Quadratic representation `Q_w(x) = 2 w∘(w∘x) − w²∘x`.
pub(crate) fn quad(block: Block, w: &[f64], x: &[f64]) -> Vec<f64> {
    match block {
        Block::Rank1 => vec![w[0] * w[0] * x[0]],
        Block::Soc(_) => {
            let wx = product(block, w, x);
            let w_wx = product(block, w, &wx);
            let ww = product(block, w, w);
            let ww_x = product(block, &ww, x);
            w_wx.iter().zip(&ww_x).map(|(a, b)| 2.0 * a - b).collect()
        }
        Block::Psd(n) => {
            let wm = psd_unpack(n, w);
            let xm = psd_unpack(n, x);
            let wxw = square_matmul(n, &square_matmul(n, &wm, &xm), &wm);
            psd_pack(n, &wxw)
        }
    }
}

/// Matrix of `Q_w` on block coordinates, row-major `d × d`.
pub(crate) fn quad_matrix(block: Block, w: &[f64]) -> Vec<f64> {
    let d = block.dim();
    let mut m = vec![0.0; d * d];
    let mut basis = vec![0.0; d];
    for j in 0..d {
        basis[j] = 1.0;
        let col = quad(block, w, &basis);
        basis[j] = 0.0;
        for i in 0..d {
            m[i * d + j] = col[i];
        }
    }
    m
}
