use alloc::string::String;

use crate::cone::Element;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected} coordinates, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid cone: {0}")]
    InvalidCone(String),

    #[error("invalid problem instance: {0}")]
    InvalidInstance(String),

    #[error("symmetric eigensolver did not converge on block {block}")]
    NoConvergence { block: usize },

    #[error("singular element on block {block} (eigenvalue {lambda:e})")]
    Singular { block: usize, lambda: f64 },

    #[error("element not in the cone interior on block {block} (eigenvalue {lambda:e})")]
    NotInterior { block: usize, lambda: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("basic procedure exceeded its budget of {iterations} updates")]
    BasicBudget { iterations: usize, last_y: Element },
}
