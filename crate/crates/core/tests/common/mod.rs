#![allow(dead_code)]

use proptest::prelude::*;
use symcone_core::linalg::Mat;
use symcone_core::{Block, ConeSpec, Element, ProblemInstance};

pub fn block() -> impl Strategy<Value = Block> {
    prop_oneof![Just(Block::Rank1), (2usize..6).prop_map(Block::Soc), (1usize..4).prop_map(Block::Psd)]
}

pub fn spec() -> impl Strategy<Value = ConeSpec> {
    prop::collection::vec(block(), 1..5).prop_map(|b| ConeSpec::new(b).unwrap())
}

/// Moves every block of `x` into the cone with smallest eigenvalue `margin`.
pub fn shift_in(spec: &ConeSpec, x: &Element, margin: f64) -> Element {
    let mut out = x.clone();
    for (k, b, r) in spec.iter() {
        let lam = spec.block_eigenvalues(k, x.block(spec, k)).unwrap();
        let shift = margin - lam.last().unwrap();
        for (o, e) in out.as_mut_slice()[r].iter_mut().zip(b.identity()) {
            *o += shift * e;
        }
    }
    out
}

/// Instance with rows orthogonal (trace inner product) to the interior `x0`.
pub fn feasible_around(spec: &ConeSpec, x0: &Element, raw_rows: &[Vec<f64>]) -> ProblemInstance {
    let w = spec.gram_weights();
    let nx = spec.inner(x0, x0).unwrap();
    let mut data = Vec::new();
    for g in raw_rows {
        let g = Element::from_vec(g.clone());
        let t = spec.inner(&g, x0).unwrap() / nx;
        let g = g.axpby(1.0, x0, -t);
        data.extend(g.as_slice().iter().zip(&w).map(|(a, b)| a * b));
    }
    ProblemInstance::new(spec.clone(), Mat::from_row_major(raw_rows.len(), spec.dim(), data)).unwrap()
}

/// `(instance, x0)` with `λ_min(x0) = 10^-depth` in every block.
pub fn thin_feasible() -> impl Strategy<Value = (ProblemInstance, Element)> {
    (spec().prop_filter("needs m < d", |s| s.dim() >= 2), 1.0f64..5.0).prop_flat_map(|(s, depth)| {
        let d = s.dim();
        let m = 1.max(d / 2);
        (
            Just(s),
            Just(depth),
            prop::collection::vec(-1.0f64..1.0, d),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), m),
        )
            .prop_map(|(s, depth, x, rows)| {
                let x0 = shift_in(&s, &Element::from_vec(x), 10f64.powf(-depth));
                (feasible_around(&s, &x0, &rows), x0)
            })
    })
}

/// Random `m × d` instance with no planted structure.
pub fn random_instance() -> impl Strategy<Value = ProblemInstance> {
    spec().prop_flat_map(|s| {
        let d = s.dim();
        (Just(s), 1..=d).prop_flat_map(move |(s, m)| {
            prop::collection::vec(-1.0f64..1.0, m * d)
                .prop_map(move |a| ProblemInstance::new(s.clone(), Mat::from_row_major(m, d, a)).unwrap())
        })
    })
}
