//! Seeded instances with a known answer.
//!
//! Feasible instances are built around an interior `x₀`: every row is a
//! random direction orthogonalized against `x₀` in the trace inner product.
//! Infeasible ones put an interior `y₀` into the range of `A*` through the
//! first row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use symcone_core::linalg::Mat;
use symcone_core::{sdp, Block, Certificate, CertificateKind, ConeSpec, Element, ProblemInstance, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub kind: Kind,
    pub m: usize,
    pub seed: u64,
    /// Eigenvalues of the witness are drawn from `[10^-spread, 1]`
    /// (log-uniform); zero gives `1 ± 0.5` perturbations of the identity.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Primal(Element),
    Dual { y: Element, u: Vec<f64> },
}

impl Witness {
    pub fn certificate(&self) -> Certificate {
        let kind = match self {
            Witness::Primal(x) => CertificateKind::Primal { x: x.clone() },
            Witness::Dual { y, u } => CertificateKind::Dual { y: y.clone(), u: u.clone() },
        };
        Certificate { kind, stats: SolveStats::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: ProblemInstance,
    pub witness: Witness,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GenerateError {
    #[error("a feasible instance needs m < d (m = {m}, d = {d})")]
    TooManyRows { m: usize, d: usize },
    #[error("an infeasible instance needs at least one row")]
    NoRows,
    #[error("spread must be finite and non-negative, got {0}")]
    BadSpread(f64),
}

fn gaussian(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian(rng, n);
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// Random orthogonal `n × n` matrix (columns), by Gram–Schmidt.
fn orthogonal(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = gaussian(rng, n);
        for _ in 0..2 {
            for c in &cols {
                let d: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= d * b);
            }
        }
        let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            cols.push(v.into_iter().map(|x| x / nrm).collect());
        }
    }
    cols
}

/// Element with eigenvalues from `eig` and a uniformly random Jordan frame.
pub fn random_element(spec: &ConeSpec, rng: &mut impl Rng, mut eig: impl FnMut(&mut dyn rand::RngCore) -> f64) -> Element {
    let mut out = Vec::with_capacity(spec.dim());
    for (_, block, _) in spec.iter() {
        match block {
            Block::Rank1 => out.push(eig(rng)),
            Block::Soc(n) => {
                let (l1, l2) = (eig(rng), eig(rng));
                let u = unit(rng, n - 1);
                out.push(0.5 * (l1 + l2));
                out.extend(u.iter().map(|v| 0.5 * (l1 - l2) * v));
            }
            Block::Psd(n) => {
                let q = orthogonal(rng, n);
                let ls: Vec<f64> = (0..n).map(|_| eig(rng)).collect();
                let mut full = vec![0.0; n * n];
                for (l, v) in ls.iter().zip(&q) {
                    for i in 0..n {
                        for j in 0..n {
                            full[i * n + j] += l * v[i] * v[j];
                        }
                    }
                }
                out.extend(sdp::pack(n, &full));
            }
        }
    }
    Element::from_vec(out)
}

fn eigen_sampler(spread: f64) -> impl FnMut(&mut dyn rand::RngCore) -> f64 {
    move |rng| {
        let u: f64 = rng.random();
        if spread == 0.0 {
            1.0 + (u - 0.5)
        } else {
            10f64.powf(-spread * u)
        }
    }
}

pub fn generate(spec: &ConeSpec, opts: &GenOptions) -> Result<Generated, GenerateError> {
    if !(opts.spread.is_finite() && opts.spread >= 0.0) {
        return Err(GenerateError::BadSpread(opts.spread));
    }
    let d = spec.dim();
    let weights = spec.gram_weights();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rows: Vec<f64> = Vec::with_capacity(opts.m * d);
    match opts.kind {
        Kind::Feasible => {
            if opts.m >= d {
                return Err(GenerateError::TooManyRows { m: opts.m, d });
            }
            let x0 = random_element(spec, &mut rng, eigen_sampler(opts.spread));
            let x0n = spec.inner(&x0, &x0).expect("shape");
            for _ in 0..opts.m {
                let g = Element::from_vec(gaussian(&mut rng, d));
                let t = spec.inner(&g, &x0).expect("shape") / x0n;
                let g = g.axpby(1.0, &x0, -t);
                rows.extend(g.as_slice().iter().zip(&weights).map(|(v, w)| v * w));
            }
            let instance = ProblemInstance::new(spec.clone(), Mat::from_row_major(opts.m, d, rows)).expect("shape");
            Ok(Generated { instance, witness: Witness::Primal(x0) })
        }
        Kind::Infeasible => {
            if opts.m == 0 {
                return Err(GenerateError::NoRows);
            }
            let y0 = random_element(spec, &mut rng, eigen_sampler(opts.spread));
            rows.extend(y0.as_slice().iter().zip(&weights).map(|(v, w)| v * w));
            for _ in 1..opts.m {
                rows.extend(gaussian(&mut rng, d));
            }
            let instance = ProblemInstance::new(spec.clone(), Mat::from_row_major(opts.m, d, rows)).expect("shape");
            let mut u = vec![0.0; opts.m];
            u[0] = 1.0;
            Ok(Generated { instance, witness: Witness::Dual { y: y0, u } })
        }
    }
}
