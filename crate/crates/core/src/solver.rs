//! Main loop: run the basic procedure on the current rescaled matrix, map
//! primal/dual finds back to the original problem, otherwise rescale every
//! block with `ρ_k > 1` and update the log-volume ledger.

use alloc::format;
use alloc::vec::Vec;

use crate::basic::{run_basic, BasicOutcome, StopRule};
use crate::cone::{ConeSpec, Element};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::projection::{ProblemInstance, Projector};
use crate::rescale::{self, RescaleDecision};
use crate::algebra::DEFAULT_TOL_INTERIOR;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Target `ε ∈ (0, 1)`: the solver may stop once no feasible point with
    /// `λ_min ≥ ε` (after normalization `‖x‖₁,∞ ≤ 1`) can exist.
    pub eps: f64,
    /// Basic procedure update budget; `None` means `4 ℓ³ r_max²`.
    pub max_bp_iters: Option<usize>,
    /// Rescaling budget; `None` means `⌈(r/φ(2)) ln(1/ε)⌉ + 8`.
    pub max_rescale_iters: Option<usize>,
    pub bp_stop: StopRule,
    pub tol_zero: f64,
    pub tol_int: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-6,
            max_bp_iters: None,
            max_rescale_iters: None,
            bp_stop: StopRule::ZZero,
            tol_zero: 1e-12,
            tol_int: DEFAULT_TOL_INTERIOR,
        }
    }
}

impl SolverConfig {
    pub fn bp_budget(&self, spec: &ConeSpec) -> usize {
        self.max_bp_iters.unwrap_or_else(|| {
            let l = spec.num_blocks();
            let r = spec.rank_max();
            4 * l * l * l * r * r
        })
    }

    pub fn rescale_budget(&self, spec: &ConeSpec) -> usize {
        self.max_rescale_iters.unwrap_or_else(|| rescale_bound(spec, self.eps) + 8)
    }
}

/// `⌈(r/φ(2)) ln(1/ε)⌉`, the worst-case number of rescaling iterations.
pub fn rescale_bound(spec: &ConeSpec, eps: f64) -> usize {
    libm::ceil(spec.rank() as f64 / rescale::phi(2.0) * libm::log(1.0 / eps)) as usize
}

/// Accumulated blockwise automorphisms and the log-volume ledger.
///
/// `forward_k = Q¹_k ⋯ Qⁱ_k` maps points of the rescaled problem to the
/// original one; `inverse_k` is its inverse, composed from the closed-form
/// inverses of the factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingState {
    spec: ConeSpec,
    forward: Vec<Mat>,
    inverse: Vec<Mat>,
    eps_ledger: Vec<f64>,
    iteration: usize,
}

impl ScalingState {
    pub fn new(spec: &ConeSpec) -> Self {
        let forward: Vec<Mat> = spec.blocks().iter().map(|b| Mat::identity(b.dim())).collect();
        ScalingState {
            spec: spec.clone(),
            inverse: forward.clone(),
            forward,
            eps_ledger: alloc::vec![0.0; spec.num_blocks()],
            iteration: 0,
        }
    }

    pub fn forward(&self, k: usize) -> &Mat {
        &self.forward[k]
    }

    pub fn inverse(&self, k: usize) -> &Mat {
        &self.inverse[k]
    }

    pub fn eps_ledger(&self) -> &[f64] {
        &self.eps_ledger
    }

    /// Completed rescaling iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Composes block `k` with `q` (on the right) and records `delta`.
    pub fn apply(&mut self, k: usize, q: &Mat, q_inv: &Mat, delta: f64) {
        self.forward[k] = self.forward[k].matmul(q);
        self.inverse[k] = q_inv.matmul(&self.inverse[k]);
        self.eps_ledger[k] += delta;
    }

    fn blockwise(&self, x: &Element, f: impl Fn(usize, &[f64]) -> Vec<f64>) -> Element {
        let mut out = Vec::with_capacity(x.len());
        for (k, _, r) in self.spec.iter() {
            out.extend(f(k, &x.as_slice()[r]));
        }
        Element::from_vec(out)
    }

    /// Rescaled primal point to the original problem: `x_k = forward_k z_k`.
    pub fn map_primal(&self, z: &Element) -> Element {
        self.blockwise(z, |k, zk| self.forward[k].matvec(zk))
    }

    /// Rescaled dual point to the original problem: `y_k = inverse_kᵀ c_k`,
    /// which carries `range((A Q)*) ∩ K` onto `range(A*) ∩ K`.
    pub fn map_dual(&self, c: &Element) -> Element {
        self.blockwise(c, |k, ck| self.inverse[k].matvec_t(ck))
    }

    /// Original point to the rescaled problem: `u_k = inverse_k x_k`.
    pub fn pull_back(&self, x: &Element) -> Element {
        self.blockwise(x, |k, xk| self.inverse[k].matvec(xk))
    }
}

/// One applied block rescaling, kept so the ledger can be replayed.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaleRecord {
    pub iteration: usize,
    pub block: usize,
    pub rho: f64,
    pub w: Vec<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveStats {
    pub bp_iterations: usize,
    pub rescale_iterations: usize,
    pub eps_ledger: Vec<f64>,
    pub transcript: Vec<RescaleRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateKind {
    /// `A x = 0`, `x ∈ int K`.
    Primal { x: Element },
    /// `y = A* u`, `y ∈ K`, `y ≠ 0`.
    Dual { y: Element, u: Vec<f64> },
    /// The ledger of block `block` fell below `threshold = log r_k + log ε`.
    /// `trivial` marks the `ε ≥ 1/r_k` short cut taken before any work.
    EpsilonInfeasible { block: usize, eps: f64, eps_k: f64, threshold: f64, trivial: bool },
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub stats: SolveStats,
}

/// Data of one completed rescaling iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub bp_iterations: usize,
    /// Threshold-meeting `y` of the rescaled problem and `z = P y`.
    pub y: Element,
    pub z: Element,
    pub decisions: Vec<RescaleDecision>,
    /// Blocks with `ρ_k ≥ 2`.
    pub good_blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Rescaled(IterationRecord),
    Finished(Certificate),
}

/// Stepwise driver; [`solve`] runs it to completion.
#[derive(Debug, Clone)]
pub struct Solver {
    inst: ProblemInstance,
    current: Mat,
    state: ScalingState,
    cfg: SolverConfig,
    stats: SolveStats,
    finished: bool,
}

impl Solver {
    pub fn new(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Self> {
        if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
            return Err(Error::Domain(format!("eps must lie in (0, 1), got {}", cfg.eps)));
        }
        let spec = inst.spec();
        Ok(Solver {
            current: inst.a().clone(),
            state: ScalingState::new(spec),
            stats: SolveStats { eps_ledger: alloc::vec![0.0; spec.num_blocks()], ..SolveStats::default() },
            inst: inst.clone(),
            cfg: cfg.clone(),
            finished: false,
        })
    }

    pub fn state(&self) -> &ScalingState {
        &self.state
    }

    /// The current rescaled matrix `Aⁱ` (rows normalized).
    pub fn current_matrix(&self) -> &Mat {
        &self.current
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    fn finish(&mut self, kind: CertificateKind) -> Step {
        self.finished = true;
        self.stats.eps_ledger = self.state.eps_ledger.clone();
        Step::Finished(Certificate { kind, stats: self.stats.clone() })
    }

    pub fn step(&mut self) -> Result<Step> {
        if self.finished {
            return Err(Error::Precondition("solver already finished".into()));
        }
        let spec = self.inst.spec().clone();
        let eps = self.cfg.eps;

        if self.stats.rescale_iterations == 0 && self.stats.bp_iterations == 0 {
            if let Some((k, b)) = spec.iter().map(|(k, b, _)| (k, b)).find(|(_, b)| eps * b.rank() as f64 >= 1.0) {
                let threshold = libm::log(b.rank() as f64) + libm::log(eps);
                return Ok(self.finish(CertificateKind::EpsilonInfeasible {
                    block: k,
                    eps,
                    eps_k: 0.0,
                    threshold,
                    trivial: true,
                }));
            }
        }
        if self.stats.rescale_iterations >= self.cfg.rescale_budget(&spec) {
            return Ok(self.finish(CertificateKind::BudgetExceeded));
        }

        let proj = Projector::from_parts(&spec, &self.current);
        let y0 = spec.identity().scaled(1.0 / spec.rank() as f64);
        let bp = match run_basic(&proj, &y0, &self.cfg) {
            Ok(bp) => bp,
            Err(Error::BasicBudget { iterations, .. }) => {
                self.stats.bp_iterations += iterations;
                return Ok(self.finish(CertificateKind::BudgetExceeded));
            }
            Err(e) => return Err(e),
        };
        self.stats.bp_iterations += bp.iterations;

        match bp.outcome {
            BasicOutcome::PrimalFound { z } => {
                let x = self.polish_primal(self.state.map_primal(&z));
                Ok(self.finish(CertificateKind::Primal { x }))
            }
            BasicOutcome::DualFound { c } => {
                let y = self.state.map_dual(&c);
                let u = Projector::build(&self.inst).range_coefficients(&y);
                Ok(self.finish(CertificateKind::Dual { y, u }))
            }
            BasicOutcome::ThresholdMet { y, z } => {
                let d = y.sub(&z);
                if spec.lambda_min_value(&d)? >= 0.0 && spec.norm2(&d) > self.cfg.tol_zero * spec.norm2(&y).max(1.0) {
                    let y = self.state.map_dual(&d);
                    let u = Projector::build(&self.inst).range_coefficients(&y);
                    return Ok(self.finish(CertificateKind::Dual { y, u }));
                }
                self.rescale(y, z, bp.iterations)
            }
        }
    }

    fn rescale(&mut self, y: Element, z: Element, bp_iterations: usize) -> Result<Step> {
        let spec = self.inst.spec().clone();
        let iteration = self.stats.rescale_iterations;
        let mut decisions = Vec::with_capacity(spec.num_blocks());
        let mut good_blocks = Vec::new();
        let mut updates = Vec::new();
        let mut stop = None;
        for k in 0..spec.num_blocks() {
            let d = rescale::decide(&spec, &y, &z, k)?;
            if d.rho >= 2.0 {
                good_blocks.push(k);
            }
            if let Some((w, delta)) = &d.applied {
                let q = rescale::block_scaling(&spec, k, w)?;
                let q_inv = rescale::block_scaling_inverse(&spec, k, w)?;
                self.stats.transcript.push(RescaleRecord { iteration, block: k, rho: d.rho, w: w.clone(), delta: *delta });
                let ledger = self.state.eps_ledger[k] + delta;
                let r_k = spec.block(k).rank() as f64;
                let threshold = libm::log(r_k) + libm::log(self.cfg.eps);
                updates.push((k, q, q_inv, *delta));
                if ledger < threshold {
                    stop = Some((k, ledger, threshold));
                }
            }
            decisions.push(d);
            if stop.is_some() {
                break;
            }
        }

        for (k, q, q_inv, delta) in updates {
            self.state.apply(k, &q, &q_inv, delta);
            let r = spec.range(k);
            for i in 0..self.current.rows() {
                let row = self.current.row_mut(i);
                let new_block = q.matvec_t(&row[r.clone()]);
                row[r.clone()].copy_from_slice(&new_block);
            }
        }
        normalize_rows(&mut self.current);
        self.state.iteration += 1;
        self.stats.rescale_iterations += 1;

        if let Some((block, eps_k, threshold)) = stop {
            return Ok(self.finish(CertificateKind::EpsilonInfeasible {
                block,
                eps: self.cfg.eps,
                eps_k,
                threshold,
                trivial: false,
            }));
        }
        Ok(Step::Rescaled(IterationRecord { iteration, bp_iterations, y, z, decisions, good_blocks }))
    }

    /// Projects the mapped point back onto `ker A` when that keeps it interior.
    fn polish_primal(&self, x: Element) -> Element {
        let spec = self.inst.spec();
        let polished = Projector::build(&self.inst).project(&x);
        if spec.lambda_min_value(&polished).is_ok_and(|l| l > 0.0) {
            polished
        } else {
            x
        }
    }

    pub fn run(mut self) -> Result<Certificate> {
        loop {
            if let Step::Finished(cert) = self.step()? {
                return Ok(cert);
            }
        }
    }
}

fn normalize_rows(a: &mut Mat) {
    for i in 0..a.rows() {
        let row = a.row_mut(i);
        let n = crate::linalg::norm2(row);
        if n > 0.0 {
            row.iter_mut().for_each(|v| *v /= n);
        }
    }
}

pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<Certificate> {
    Solver::new(inst, cfg)?.run()
}
