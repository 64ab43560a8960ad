//! File formats, seeded instance generation and the `symcone` command-line
//! driver around `symcone-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod format;
pub mod generate;
pub mod phi_curve;
