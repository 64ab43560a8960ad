//! Samples of `exp(−φ(ρ))` as CSV.

use symcone_core::rescale::phi;

pub const HEADER: &str = "rho,exp_neg_phi";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CurveError {
    #[error("rho_min must be at least 1, got {0}")]
    MinBelowOne(f64),
    #[error("need rho_min < rho_max, got {0} and {1}")]
    EmptyRange(f64, f64),
    #[error("need at least 2 steps, got {0}")]
    TooFewSteps(usize),
}

/// `steps` evenly spaced points from `rho_min` to `rho_max`, both included.
pub fn phi_curve(rho_min: f64, rho_max: f64, steps: usize) -> Result<Vec<(f64, f64)>, CurveError> {
    if !(rho_min >= 1.0) {
        return Err(CurveError::MinBelowOne(rho_min));
    }
    if !(rho_min < rho_max) || !rho_max.is_finite() {
        return Err(CurveError::EmptyRange(rho_min, rho_max));
    }
    if steps < 2 {
        return Err(CurveError::TooFewSteps(steps));
    }
    let h = (rho_max - rho_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let rho = if i + 1 == steps { rho_max } else { rho_min + h * i as f64 };
            (rho, (-phi(rho)).exp())
        })
        .collect())
}

pub fn to_csv(rows: &[(f64, f64)]) -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for (rho, v) in rows {
        s.push_str(&format!("{rho},{v}\n"));
    }
    s
}
