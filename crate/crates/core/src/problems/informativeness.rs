use serde::{Deserialize, Serialize};

use super::Problem;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::space::{uniform_sample, Fidelity, SearchSpace};

/// Ordinary least squares fit `hf ≈ slope · lf + intercept` and its R².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformativenessReport {
    /// Raw coefficient of determination; may be negative only through
    /// rounding, and is 0 for a degenerate fit.
    pub r_squared: f64,
    pub n_samples: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Set when the LF values have zero variance.
    pub degenerate: bool,
}

impl InformativenessReport {
    /// R² clamped to `[0, 1]`, as consumed by the advisor.
    pub fn clamped(&self) -> f64 {
        self.r_squared.clamp(0.0, 1.0)
    }
}

pub fn r_squared_from_pairs(hf: &[f64], lf: &[f64]) -> Result<InformativenessReport> {
    if hf.len() != lf.len() {
        return Err(Error::DimensionMismatch {
            expected: hf.len(),
            found: lf.len(),
        });
    }
    let n = hf.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, found: n });
    }
    if hf.iter().chain(lf).any(|v| !v.is_finite()) {
        return Err(Error::Inconsistent("non-finite value among informativeness pairs".into()));
    }
    let mh = hf.iter().sum::<f64>() / n as f64;
    let ml = lf.iter().sum::<f64>() / n as f64;
    let (mut sll, mut slh, mut shh) = (0.0, 0.0, 0.0);
    for (h, l) in hf.iter().zip(lf) {
        let (dh, dl) = (h - mh, l - ml);
        sll += dl * dl;
        slh += dl * dh;
        shh += dh * dh;
    }
    if !(sll > 0.0) {
        return Ok(InformativenessReport {
            r_squared: 0.0,
            n_samples: n,
            slope: 0.0,
            intercept: mh,
            degenerate: true,
        });
    }
    let slope = slh / sll;
    let intercept = mh - slope * ml;
    let ss_res: f64 = hf
        .iter()
        .zip(lf)
        .map(|(h, l)| {
            let r = h - (slope * l + intercept);
            r * r
        })
        .sum();
    let r_squared = if shh > 0.0 { 1.0 - ss_res / shh } else { 1.0 };
    Ok(InformativenessReport {
        r_squared,
        n_samples: n,
        slope,
        intercept,
        degenerate: false,
    })
}

/// Samples `n` inputs uniformly (capped at the table size for candidate
/// spaces), evaluates both fidelities and reports the R² of the linear fit.
pub fn estimate_informativeness(problem: &dyn Problem, n: usize, rng: &mut RngStream) -> Result<InformativenessReport> {
    let n = match problem.space() {
        SearchSpace::Discrete(s) => n.min(s.len()),
        SearchSpace::Continuous(_) => n,
    };
    let points = uniform_sample(problem.space(), n, rng)?;
    let mut hf = Vec::with_capacity(n);
    let mut lf = Vec::with_capacity(n);
    for p in &points {
        hf.push(problem.evaluate(p, Fidelity::High)?);
        lf.push(problem.evaluate(p, Fidelity::Low)?);
    }
    r_squared_from_pairs(&hf, &lf)
}
