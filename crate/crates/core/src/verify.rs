//! Independent re-check of a certificate against the original instance.

use alloc::vec::Vec;

use crate::linalg::norm2;
use crate::projection::ProblemInstance;
use crate::rescale::{phi, volume_delta};
use crate::solver::{Certificate, CertificateKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Measured quantity.
    pub residual: f64,
    /// Bound the quantity was compared with.
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn at_most(&mut self, name: &'static str, residual: f64, threshold: f64) {
        self.checks.push(Check { name, residual, threshold, passed: residual <= threshold });
    }

    fn above(&mut self, name: &'static str, value: f64, bound: f64) {
        self.checks.push(Check { name, residual: value, threshold: bound, passed: value > bound });
    }
}

pub fn verify(inst: &ProblemInstance, cert: &Certificate, tol: f64) -> VerifyReport {
    let mut rep = VerifyReport::default();
    let spec = inst.spec();
    match &cert.kind {
        CertificateKind::Primal { x } => {
            let shape_ok = spec.check(x).is_ok() && x.is_finite();
            rep.at_most("shape", if shape_ok { 0.0 } else { 1.0 }, 0.0);
            if !shape_ok {
                return rep;
            }
            let ax = norm2(&inst.apply(x));
            let scale = inst.a().frobenius_norm() * norm2(x.as_slice());
            rep.at_most("kernel residual", ax, tol * scale);
            let lam = spec.lambda_min_value(x).unwrap_or(f64::NAN);
            rep.above("interior", lam, 0.0);
        }
        CertificateKind::Dual { y, u } => {
            let shape_ok = spec.check(y).is_ok() && y.is_finite() && u.len() == inst.m() && u.iter().all(|v| v.is_finite());
            rep.at_most("shape", if shape_ok { 0.0 } else { 1.0 }, 0.0);
            if !shape_ok {
                return rep;
            }
            let y_inf = spec.norm(y, crate::NormKind::Inf).unwrap_or(f64::NAN);
            let lam = spec.lambda_min_value(y).unwrap_or(f64::NAN);
            rep.above("membership", lam, -tol * y_inf);
            let y_norm = spec.norm2(y);
            rep.above("nonzero", y_norm, 0.0);
            let fit = spec.norm2(&y.sub(&inst.adjoint(u)));
            rep.at_most("range fit", fit, tol * y_norm);
        }
        CertificateKind::EpsilonInfeasible { block, eps, eps_k, threshold, trivial } => {
            let k = *block;
            if k >= spec.num_blocks() || !(*eps > 0.0 && *eps < 1.0) {
                rep.at_most("block index", k as f64, spec.num_blocks() as f64 - 1.0);
                rep.above("eps range", *eps, 0.0);
                rep.at_most("eps range", *eps, 1.0);
                return rep;
            }
            let r_k = spec.block(k).rank() as f64;
            let fresh_threshold = libm::log(r_k) + libm::log(*eps);
            rep.at_most("threshold", libm::fabs(fresh_threshold - threshold), tol * fresh_threshold.abs().max(1.0));
            if *trivial {
                rep.at_most("trivial eps", 1.0 / r_k, *eps);
                return rep;
            }
            let mut ledger = alloc::vec![0.0; spec.num_blocks()];
            let mut delta_err = 0.0f64;
            let mut decrease_gap = f64::NEG_INFINITY;
            let mut w_ok = true;
            for rec in &cert.stats.transcript {
                if rec.block >= spec.num_blocks() || rec.w.len() != spec.block(rec.block).dim() {
                    w_ok = false;
                    continue;
                }
                let rank = spec.block(rec.block).rank() as f64;
                match volume_delta(spec, rec.block, &rec.w) {
                    Ok(d) => {
                        delta_err = delta_err.max(libm::fabs(d - rec.delta));
                        ledger[rec.block] += d;
                        if rec.rho >= 2.0 {
                            decrease_gap = decrease_gap.max(d + phi(2.0) / rank);
                        }
                    }
                    Err(_) => w_ok = false,
                }
            }
            rep.at_most("transcript well-formed", if w_ok { 0.0 } else { 1.0 }, 0.0);
            rep.at_most("delta replay", delta_err, tol);
            if decrease_gap > f64::NEG_INFINITY {
                rep.at_most("good-step decrease", decrease_gap, tol);
            }
            let ledger_err = match cert.stats.eps_ledger.get(k) {
                Some(l) => libm::fabs(l - ledger[k]).max(libm::fabs(eps_k - ledger[k])),
                None => f64::INFINITY,
            };
            rep.at_most("ledger replay", ledger_err, tol * ledger[k].abs().max(1.0));
            rep.checks.push(Check {
                name: "ledger below threshold",
                residual: ledger[k],
                threshold: fresh_threshold,
                passed: ledger[k] < fresh_threshold,
            });
        }
        CertificateKind::BudgetExceeded => {
            rep.checks.push(Check { name: "no claim", residual: f64::NAN, threshold: f64::NAN, passed: false });
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use alloc::vec;

    use super::*;
    use crate::linalg::Mat;
    use crate::solver::SolveStats;
    use crate::{ConeSpec, Element};

    fn pair(row: [f64; 2]) -> ProblemInstance {
        ProblemInstance::new(ConeSpec::nonneg(2).unwrap(), Mat::from_row_major(1, 2, row.to_vec())).unwrap()
    }

    fn cert(kind: CertificateKind) -> Certificate {
        Certificate { kind, stats: SolveStats::default() }
    }

    #[test]
    fn primal_half_half() {
        let c = cert(CertificateKind::Primal { x: Element::from_vec(vec![0.5, 0.5]) });
        let rep = verify(&pair([1.0, -1.0]), &c, 1e-8);
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn dual_exact_fit() {
        let c = cert(CertificateKind::Dual { y: Element::from_vec(vec![1.0, 1.0]), u: vec![1.0] });
        assert!(verify(&pair([1.0, 1.0]), &c, 1e-8).passed());
    }

    #[test]
    fn tampered_dual_fails_membership() {
        let c = cert(CertificateKind::Dual { y: Element::from_vec(vec![1.0, -1.0]), u: vec![1.0] });
        let rep = verify(&pair([1.0, 1.0]), &c, 1e-8);
        assert!(!rep.passed());
        assert!(rep.failures().any(|f| f.name == "membership"));
    }

    #[test]
    fn tampered_primal_fails() {
        let c = cert(CertificateKind::Primal { x: Element::from_vec(vec![0.5, -0.5]) });
        let rep = verify(&pair([1.0, -1.0]), &c, 1e-8);
        assert!(rep.failures().any(|f| f.name == "interior"));
        assert!(rep.failures().any(|f| f.name == "kernel residual"));
    }

    #[test]
    fn budget_exceeded_makes_no_claim() {
        assert!(!verify(&pair([1.0, 1.0]), &cert(CertificateKind::BudgetExceeded), 1e-8).passed());
    }

    #[test]
    fn trivial_eps_certificate() {
        let threshold = 2f64.ln() + 0.5f64.ln();
        let kind = CertificateKind::EpsilonInfeasible { block: 0, eps: 0.5, eps_k: 0.0, threshold, trivial: true };
        let spec = ConeSpec::new(vec![crate::Block::Soc(3)]).unwrap();
        let inst = ProblemInstance::new(spec, Mat::zeros(1, 3)).unwrap();
        assert!(verify(&inst, &cert(kind), 1e-8).passed());
    }
}
