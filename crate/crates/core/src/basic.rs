//! The basic procedure: a von Neumann scheme that drives `‖P y‖` down over
//! `{y ∈ int K : ⟨e, y⟩ = 1}` until it finds a primal point, a dual
//! certificate, or a `y` with `‖P y‖ ≤ ‖y‖₁,∞ / (2 r_max √ℓ)`.

use alloc::format;

use crate::cone::{ConeSpec, Element};
use crate::error::{Error, Result};
use crate::projection::Projector;
use crate::solver::SolverConfig;

/// Exit test used in place of `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// Stop with a dual certificate when `P y = 0`.
    #[default]
    ZZero,
    /// Stop when `y − P y ∈ K`: a dual certificate if nonzero, otherwise `P y`
    /// is primal.
    YMinusZ,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasicOutcome {
    /// `z ∈ int K` with `A z = 0`.
    PrimalFound { z: Element },
    /// `c ∈ K`, `c ≠ 0`, `P c = 0`.
    DualFound { c: Element },
    /// `‖z‖ ≤ ‖y‖₁,∞ / (2 r_max √ℓ)` with `z = P y`.
    ThresholdMet { y: Element, z: Element },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicResult {
    pub outcome: BasicOutcome,
    /// Number of executed `y` updates.
    pub iterations: usize,
}

/// Data of one executed update `y ← α y + (1 − α) c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    pub z_norm: f64,
    pub z_norm_next: f64,
    pub alpha: f64,
    /// `⟨z, c⟩ = λ_min(z)`.
    pub z_dot_c: f64,
}

/// Threshold `1 / (2 r_max √ℓ)`.
pub fn threshold_factor(spec: &ConeSpec) -> f64 {
    1.0 / (2.0 * spec.rank_max() as f64 * libm::sqrt(spec.num_blocks() as f64))
}

pub fn run_basic(p: &Projector, y_init: &Element, cfg: &SolverConfig) -> Result<BasicResult> {
    run_basic_observed(p, y_init, cfg, |_| {})
}

/// Runs the basic procedure, calling `observe` after every update.
pub fn run_basic_observed(
    p: &Projector,
    y_init: &Element,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&UpdateRecord),
) -> Result<BasicResult> {
    let spec = p.spec();
    spec.check(y_init)?;
    let tr = spec.trace(y_init)?;
    if (tr - 1.0).abs() > 1e-10 || !spec.is_interior(y_init, cfg.tol_int) {
        return Err(Error::Precondition(format!(
            "initial point must be interior with unit trace (trace {tr})"
        )));
    }
    let budget = cfg.bp_budget(spec);
    let thr = threshold_factor(spec);
    let is_zero = |v: &Element, scale: f64| spec.norm2(v) <= cfg.tol_zero * scale.max(1.0);

    let mut y = y_init.clone();
    let mut z = p.project(&y);
    let mut iterations = 0;
    loop {
        let y_norm = spec.norm2(&y);
        let done = |outcome| Ok(BasicResult { outcome, iterations });
        match cfg.bp_stop {
            StopRule::ZZero => {
                if is_zero(&z, y_norm) {
                    return done(BasicOutcome::DualFound { c: y });
                }
            }
            StopRule::YMinusZ => {
                let d = y.sub(&z);
                if spec.lambda_min_value(&d)? >= 0.0 {
                    if is_zero(&d, y_norm) {
                        return done(BasicOutcome::PrimalFound { z });
                    }
                    return done(BasicOutcome::DualFound { c: d });
                }
            }
        }
        if spec.is_interior(&z, cfg.tol_int) {
            return done(BasicOutcome::PrimalFound { z });
        }
        let z_norm = spec.norm2(&z);
        if z_norm <= thr * spec.cone_norm_one_inf(&y) {
            return done(BasicOutcome::ThresholdMet { y, z });
        }
        if iterations >= budget {
            return Err(Error::BasicBudget { iterations, last_y: y });
        }

        let (lam, c) = spec.lambda_min(&z)?;
        let pc = p.project(&c);
        if is_zero(&pc, spec.norm2(&c)) {
            return done(BasicOutcome::DualFound { c });
        }
        if spec.is_interior(&pc, cfg.tol_int) {
            return done(BasicOutcome::PrimalFound { z: pc });
        }
        // ‖c‖₁,∞ = ⟨e, c⟩ = 1
        if spec.norm2(&pc) <= thr {
            return done(BasicOutcome::ThresholdMet { y: c, z: pc });
        }

        let z_minus_p = z.sub(&pc);
        let denom = spec.inner_unchecked(z_minus_p.as_slice(), z_minus_p.as_slice());
        let alpha = -spec.inner_unchecked(pc.as_slice(), z_minus_p.as_slice()) / denom;
        let mut next = y.axpby(alpha, &c, 1.0 - alpha);
        let t = spec.trace(&next)?;
        next = next.scaled(1.0 / t);
        let z_next = p.project(&next);
        iterations += 1;
        observe(&UpdateRecord { z_norm, z_norm_next: spec.norm2(&z_next), alpha, z_dot_c: lam });
        y = next;
        z = z_next;
    }
}

#[cfg(test)]
mod tests {
    use alloc::vec;
    use alloc::vec::Vec;

    use super::*;
    use crate::linalg::Mat;
    use crate::projection::ProblemInstance;
    use crate::Block;

    fn projector(spec: ConeSpec, rows: usize, data: &[f64]) -> Projector {
        let d = spec.dim();
        Projector::build(&ProblemInstance::new(spec, Mat::from_row_major(rows, d, data.to_vec())).unwrap())
    }

    fn start(spec: &ConeSpec) -> Element {
        spec.identity().scaled(1.0 / spec.rank() as f64)
    }

    #[test]
    fn interior_kernel_gives_primal_immediately() {
        let spec = ConeSpec::nonneg(2).unwrap();
        let p = projector(spec.clone(), 1, &[1.0, -1.0]);
        let res = run_basic(&p, &start(&spec), &SolverConfig::default()).unwrap();
        assert_eq!(res.iterations, 0);
        match res.outcome {
            BasicOutcome::PrimalFound { z } => {
                assert!((z.as_slice()[0] - 0.5).abs() < 1e-15 && (z.as_slice()[1] - 0.5).abs() < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orthogonal_kernel_gives_dual() {
        let spec = ConeSpec::nonneg(2).unwrap();
        let p = projector(spec.clone(), 1, &[1.0, 1.0]);
        let res = run_basic(&p, &start(&spec), &SolverConfig::default()).unwrap();
        assert_eq!(res.outcome, BasicOutcome::DualFound { c: start(&spec) });
    }

    #[test]
    fn y_minus_z_rule_on_the_same_pair() {
        let spec = ConeSpec::nonneg(2).unwrap();
        let cfg = SolverConfig { bp_stop: StopRule::YMinusZ, ..SolverConfig::default() };
        let p = projector(spec.clone(), 1, &[1.0, 1.0]);
        assert!(matches!(run_basic(&p, &start(&spec), &cfg).unwrap().outcome, BasicOutcome::DualFound { .. }));
        let p = projector(spec.clone(), 1, &[1.0, -1.0]);
        assert!(matches!(run_basic(&p, &start(&spec), &cfg).unwrap().outcome, BasicOutcome::PrimalFound { .. }));
    }

    #[test]
    fn rejects_non_normalized_start() {
        let spec = ConeSpec::nonneg(2).unwrap();
        let p = projector(spec.clone(), 1, &[1.0, 1.0]);
        assert!(run_basic(&p, &spec.identity(), &SolverConfig::default()).is_err());
    }

    #[test]
    fn potential_grows_by_one_per_update() {
        // kernel spanned by (1, -2, 0, 0, 0) and (0, 0, 1, -1, -1): no interior point
        let spec = ConeSpec::new(vec![Block::Rank1, Block::Rank1, Block::Soc(3)]).unwrap();
        let p = projector(
            spec.clone(),
            3,
            &[2.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0],
        );
        let mut records: Vec<UpdateRecord> = Vec::new();
        let res = run_basic_observed(&p, &start(&spec), &SolverConfig::default(), |r| records.push(*r)).unwrap();
        assert!(res.iterations <= SolverConfig::default().bp_budget(&spec));
        for r in &records {
            assert!(r.alpha > 0.0 && r.alpha < 1.0);
            assert!(r.z_dot_c <= 0.0);
            let gain = 1.0 / (r.z_norm_next * r.z_norm_next) - 1.0 / (r.z_norm * r.z_norm);
            assert!(gain >= 1.0 - 1e-9, "gain {gain}");
        }
    }
}
