//! Volumetric rescaling: step ratios `ρ_k`, the shift `β_k`, the new
//! half-space normal `w_k`, the guaranteed decrease `φ(ρ)` and the block
//! automorphism `Q_{w_k^{-1/2} √r_k}`.
//!
//! For `ρ > 1` the half-space `H(w, w⁻¹)` with
//! `w = ((r − β)/⟨y, e⟩) ρ r y + β e` contains every feasible block and its
//! intersection with the cone has volume at most `exp(−φ(ρ)/r)^d` times that
//! of `H(e, e/r) ∩ K`.

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::log_det_of;
use crate::cone::{ConeSpec, Element};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Outcome for one block after a threshold-meeting `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaleDecision {
    pub rho: f64,
    /// `Some((w_k, log-volume delta))` when `ρ_k > 1`.
    pub applied: Option<(Vec<f64>, f64)>,
}

/// `ρ_k = ‖y_k‖₁ / (r_k ‖z‖ √ℓ)` where `z = P y`.
pub fn rho_for_block(spec: &ConeSpec, y: &Element, z: &Element, k: usize) -> Result<f64> {
    spec.check(y)?;
    spec.check(z)?;
    let z_norm = spec.norm2(z);
    if !(z_norm > 0.0) {
        return Err(Error::Precondition("rho needs P y ≠ 0; y is a dual certificate".into()));
    }
    let y_k = y.block(spec, k);
    let one_norm: f64 = spec.block_eigenvalues(k, y_k)?.iter().map(|l| libm::fabs(*l)).sum();
    let r_k = spec.block(k).rank() as f64;
    Ok(one_norm / (r_k * z_norm * libm::sqrt(spec.num_blocks() as f64)))
}

/// `z_ρ = 1/ρ − 1/√(ρ(3ρ − 2))`, the gap `r − β`.
pub fn z_rho(rho: f64) -> f64 {
    1.0 / rho - 1.0 / libm::sqrt(rho * (3.0 * rho - 2.0))
}

/// `β = r_k − z_ρ`.
pub fn beta_from_rho(rho: f64, r_k: usize) -> Result<f64> {
    if !(rho > 1.0) {
        return Err(Error::Domain(format!("beta needs rho > 1, got {rho}")));
    }
    Ok(r_k as f64 - z_rho(rho))
}

/// `φ(ρ) = 2 − 1/ρ − √(3 − 2/ρ)`.
pub fn phi(rho: f64) -> f64 {
    2.0 - 1.0 / rho - libm::sqrt(3.0 - 2.0 / rho)
}

/// `w_k = (z_ρ/⟨y_k, e_k⟩) ρ r_k y_k + β e_k`.
pub fn build_w(spec: &ConeSpec, k: usize, y_k: &[f64], rho: f64) -> Result<Vec<f64>> {
    let block = spec.block(k);
    if y_k.len() != block.dim() {
        return Err(Error::Shape { expected: block.dim(), got: y_k.len() });
    }
    let r_k = block.rank();
    let beta = beta_from_rho(rho, r_k)?;
    let tr = spec.block_trace(k, y_k);
    if !(tr > 0.0) {
        return Err(Error::Precondition(format!("block {k}: ⟨y_k, e_k⟩ = {tr} must be positive")));
    }
    let scale = (r_k as f64 - beta) / tr * rho * r_k as f64;
    Ok(y_k.iter().zip(block.identity()).map(|(y, e)| scale * y + beta * e).collect())
}

/// `log r_k − (1/r_k) log det w_k`, the ledger increment.
pub fn volume_delta(spec: &ConeSpec, k: usize, w_k: &[f64]) -> Result<f64> {
    let r_k = spec.block(k).rank() as f64;
    let ev = spec.block_eigenvalues(k, w_k)?;
    Ok(libm::log(r_k) - log_det_of(k, &ev)? / r_k)
}

/// Matrix of `Q_{w_k^{-1/2} √r_k}` on block coordinates.
pub fn block_scaling(spec: &ConeSpec, k: usize, w_k: &[f64]) -> Result<Mat> {
    let r_k = spec.block(k).rank() as f64;
    spec.quad_matrix(k, w_k, libm::sqrt(r_k))
}

/// Inverse of [`block_scaling`]: `Q_{w_k^{1/2} / √r_k}`.
pub fn block_scaling_inverse(spec: &ConeSpec, k: usize, w_k: &[f64]) -> Result<Mat> {
    let r_k = spec.block(k).rank() as f64;
    let s: Vec<f64> = spec.block_sqrt(k, w_k)?.iter().map(|v| v / libm::sqrt(r_k)).collect();
    Ok(spec.quad_rep_matrix(k, &s))
}

/// Applies the `ρ_k > 1` rule to block `k`.
pub fn decide(spec: &ConeSpec, y: &Element, z: &Element, k: usize) -> Result<RescaleDecision> {
    let rho = rho_for_block(spec, y, z, k)?;
    if rho > 1.0 {
        let w = build_w(spec, k, y.block(spec, k), rho)?;
        let delta = volume_delta(spec, k, &w)?;
        Ok(RescaleDecision { rho, applied: Some((w, delta)) })
    } else {
        Ok(RescaleDecision { rho, applied: None })
    }
}

#[cfg(test)]
mod tests {
    use alloc::vec;

    use super::*;
    use crate::cone::Block;

    #[test]
    fn phi_values() {
        assert_eq!(phi(1.0), 0.0);
        assert!((phi(2.0) - (1.5 - core::f64::consts::SQRT_2)).abs() < 1e-15);
        assert!(libm::exp(-phi(2.0)) < 0.918);
        assert!((phi(1e12) - (2.0 - 3f64.sqrt())).abs() < 1e-11);
        let mut last = 0.0;
        for i in 1..200 {
            let v = phi(1.0 + i as f64 * 0.05);
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn beta_examples() {
        assert!((beta_from_rho(2.0, 3).unwrap() - 2.853_553_390_593_273_7).abs() < 1e-12);
        assert!((beta_from_rho(2.0, 1).unwrap() - 0.853_553_390_593_273_7).abs() < 1e-12);
        assert!(beta_from_rho(1.0, 1).is_err());
        assert!(z_rho(1.0 + 1e-9).abs() < 1e-8);
    }

    #[test]
    fn rho_examples() {
        let spec = ConeSpec::new(vec![Block::Soc(3)]).unwrap();
        let y = spec.identity().scaled(0.5);
        // ‖z‖ = 1/4 in the trace norm: z = (1/(4√2), 0, 0)
        let z = Element::from_vec(vec![0.25 / 2f64.sqrt(), 0.0, 0.0]);
        assert!((rho_for_block(&spec, &y, &z, 0).unwrap() - 2.0).abs() < 1e-14);
        assert!(rho_for_block(&spec, &y, &spec.zeros(), 0).is_err());
    }

    #[test]
    fn rank1_w_and_delta() {
        let spec = ConeSpec::nonneg(1).unwrap();
        let w = build_w(&spec, 0, &[1.0], 2.0).unwrap();
        assert!((w[0] - 1.146_446_609_406_726_2).abs() < 1e-12);
        let delta = volume_delta(&spec, 0, &w).unwrap();
        assert!((delta + 0.136_667_253_898_929_1).abs() < 1e-12);
        assert!(delta <= -phi(2.0));
        // doubling y leaves w unchanged
        assert_eq!(build_w(&spec, 0, &[2.0], 2.0).unwrap(), w);
        assert!(build_w(&spec, 0, &[0.0], 2.0).is_err());
    }

    #[test]
    fn identity_delta_is_log_rank() {
        let spec = ConeSpec::new(vec![Block::Psd(3), Block::Rank1]).unwrap();
        let d = volume_delta(&spec, 0, &Block::Psd(3).identity()).unwrap();
        assert!((d - 3f64.ln()).abs() < 1e-15);
        assert_eq!(volume_delta(&spec, 1, &[1.0]).unwrap(), 0.0);
        assert!(volume_delta(&spec, 1, &[-1.0]).is_err());
    }

    #[test]
    fn scaling_examples() {
        let spec = ConeSpec::new(vec![Block::Psd(3), Block::Rank1, Block::Soc(4)]).unwrap();
        for k in 0..3 {
            let b = spec.block(k);
            let w: Vec<f64> = b.identity().iter().map(|v| v * b.rank() as f64).collect();
            let m = block_scaling(&spec, k, &w).unwrap();
            assert!(m.max_abs_diff(&Mat::identity(b.dim())) < 1e-14);
        }
        let m = block_scaling(&spec, 1, &[4.0]).unwrap();
        assert!((m[(0, 0)] - 0.25).abs() < 1e-15);
        let inv = block_scaling_inverse(&spec, 1, &[4.0]).unwrap();
        assert!((inv[(0, 0)] - 4.0).abs() < 1e-15);
    }
}
