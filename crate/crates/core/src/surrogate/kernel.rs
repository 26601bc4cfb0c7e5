//! Product kernel over (input, fidelity) pairs.
//!
//! ```text
//! k((x,l),(x',l')) = σ_f² · k_I(x,x') · k_IS(l,l')
//! k_I(x,x')        = exp(-½ Σ_i (x_i - x'_i)² / λ_i)
//! k_IS(l,l')       = c + (1-l)^(1+δ) (1-l')^(1+δ)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset keeping `δ` strictly inside the log parameterization.
pub const DELTA_OFFSET: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub length_scales: Vec<f64>,
    pub fidelity_offset: f64,
    pub fidelity_exponent: f64,
    pub signal_variance: f64,
    pub noise_variance: f64,
}

impl KernelParams {
    /// Starting point used for the first restart of every fit.
    pub fn initial(dim: usize) -> Self {
        KernelParams {
            length_scales: vec![0.5; dim],
            fidelity_offset: 1.0,
            fidelity_exponent: 1.0,
            signal_variance: 1.0,
            noise_variance: 1e-2,
        }
    }

    pub fn dim(&self) -> usize {
        self.length_scales.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, v: f64| Error::config(field, format!("{v} violates its positivity constraint"));
        if let Some(&l) = self.length_scales.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(bad("length_scales", l));
        }
        if !(self.fidelity_offset >= 0.0) {
            return Err(bad("fidelity_offset", self.fidelity_offset));
        }
        if !(self.fidelity_exponent >= 0.0) {
            return Err(bad("fidelity_exponent", self.fidelity_exponent));
        }
        if !(self.signal_variance > 0.0) {
            return Err(bad("signal_variance", self.signal_variance));
        }
        if !(self.noise_variance >= 0.0) {
            return Err(bad("noise_variance", self.noise_variance));
        }
        Ok(())
    }

    /// Optimizer coordinates: `[ln λ.., ln c, ln(δ + 1e-6), ln σ_f², ln σ_ε²]`.
    pub fn to_log(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.length_scales.iter().map(|l| l.ln()).collect();
        v.push(self.fidelity_offset.ln());
        v.push((self.fidelity_exponent + DELTA_OFFSET).ln());
        v.push(self.signal_variance.ln());
        v.push(self.noise_variance.ln());
        v
    }

    pub fn from_log(theta: &[f64]) -> Self {
        let d = theta.len() - 4;
        KernelParams {
            length_scales: theta[..d].iter().map(|v| v.exp()).collect(),
            fidelity_offset: theta[d].exp(),
            fidelity_exponent: (theta[d + 1].exp() - DELTA_OFFSET).max(0.0),
            signal_variance: theta[d + 2].exp(),
            noise_variance: theta[d + 3].exp(),
        }
    }
}

pub fn kernel_input(x: &[f64], x2: &[f64], length_scales: &[f64]) -> Result<f64> {
    if x.len() != x2.len() || x.len() != length_scales.len() {
        return Err(Error::DimensionMismatch {
            expected: length_scales.len(),
            found: if x.len() != length_scales.len() { x.len() } else { x2.len() },
        });
    }
    Ok(input_unchecked(x, x2, length_scales))
}

#[inline]
pub(crate) fn input_unchecked(x: &[f64], x2: &[f64], length_scales: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((a, b), l) in x.iter().zip(x2).zip(length_scales) {
        let d = a - b;
        s += d * d / l;
    }
    (-0.5 * s).exp()
}

/// `(1 - l)^(1 + δ)`, the per-point factor of the fidelity kernel.
#[inline]
pub(crate) fn fidelity_factor(l: f64, delta: f64) -> f64 {
    (1.0 - l).powf(1.0 + delta)
}

pub fn kernel_fidelity(l: f64, l2: f64, c: f64, delta: f64) -> f64 {
    c + fidelity_factor(l, delta) * fidelity_factor(l2, delta)
}

pub fn kernel_full(a: (&[f64], f64), b: (&[f64], f64), params: &KernelParams) -> Result<f64> {
    let ki = kernel_input(a.0, b.0, &params.length_scales)?;
    Ok(params.signal_variance
        * ki
        * kernel_fidelity(a.1, b.1, params.fidelity_offset, params.fidelity_exponent))
}
