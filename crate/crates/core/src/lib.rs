//! Feasibility solver for homogeneous conic systems `A x = 0, x ∈ int K`
//! where `K` is a product of simple symmetric cones (nonnegative half-lines,
//! Lorentz cones and positive semidefinite cones).
//!
//! The solver alternates a von Neumann style basic procedure, which either
//! finds a primal point, a dual certificate, or a point `y` with a small
//! projection onto `ker A`, with a rescaling step that replaces `A` by
//! `A Q` for a blockwise cone automorphism `Q`. Every rescaling provably
//! shrinks the volume of a half-space slice of the feasible region, and the
//! accumulated log-volume ledger bounds the minimum eigenvalue of any feasible
//! point, so the run ends with a primal certificate, a dual certificate, or a
//! proof that no `ε`-feasible point exists.
//!
//! The crate is `no_std` and only needs an allocator.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod basic;
mod cone;
mod error;
pub mod linalg;
pub mod projection;
pub mod rescale;
pub mod sdp;
pub mod solver;
pub mod verify;

pub use algebra::NormKind;
pub use basic::{run_basic, run_basic_observed, BasicOutcome, BasicResult, StopRule, UpdateRecord};
pub use cone::{Block, ConeSpec, Element};
pub use error::{Error, Result};
pub use projection::{ProblemInstance, Projector};
pub use solver::{
    solve, Certificate, CertificateKind, RescaleRecord, ScalingState, SolveStats, Solver,
    SolverConfig, Step,
};
pub use verify::{verify, Check, VerifyReport};
