use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use super::Problem;
use crate::error::{Error, Result};
use crate::space::{DesignPoint, Fidelity, FidelityModel, SearchSpace};

/// Minimum of the high-fidelity Branin function, attained at
/// `(-π, 12.275)`, `(π, 2.275)` and `(9.42478, 2.475)`.
pub const BRANIN_MINIMUM: f64 = 0.397_887_357_729_738_1;

/// Lower clamp applied to `x₁` of the Park function.
pub const PARK_X1_FLOOR: f64 = 1e-6;

fn check(x: &[f64], bounds: &[(f64, f64)]) -> Result<()> {
    if x.len() != bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: bounds.len(),
            found: x.len(),
        });
    }
    for (dim, (&value, &(lo, hi))) in x.iter().zip(bounds).enumerate() {
        if !(value >= lo && value <= hi) {
            return Err(Error::OutOfBounds { dim, value, lo, hi });
        }
    }
    Ok(())
}

fn bias_alpha(fidelity: Fidelity, alpha: f64) -> f64 {
    match fidelity {
        Fidelity::High => 1.0,
        Fidelity::Low => alpha,
    }
}

/// Biased Branin function in its native minimization form.
pub fn branin(x: &[f64], fidelity: Fidelity, alpha: f64) -> Result<f64> {
    check(x, &SyntheticFamily::Branin2D.bounds())?;
    let a = bias_alpha(fidelity, alpha);
    let (x1, x2) = (x[0], x[1]);
    let b = 5.1 / (4.0 * PI * PI) - 0.1 * (1.0 - a);
    let t = x2 - b * x1 * x1 + 5.0 / PI * x1 - 6.0;
    Ok(t * t + 10.0 * (1.0 - 1.0 / (8.0 * PI)) * x1.cos() + 10.0)
}

/// Biased Park function in its native minimization form.
pub fn park(x: &[f64], fidelity: Fidelity, alpha: f64) -> Result<f64> {
    check(x, &SyntheticFamily::Park4D.bounds())?;
    let a = bias_alpha(fidelity, alpha);
    let x1 = x[0].max(PARK_X1_FLOOR);
    let (x2, x3, x4) = (x[1], x[2], x[3]);
    let first = 0.5 * x1 * ((1.0 + (x2 + x3 * x3) * x4 / (x1 * x1)).sqrt() - 1.0);
    let second = (x1 + (3.0 - 1.5 * (1.0 - a)) * x4) * (1.0 + x3.sin()).exp();
    Ok(first + second)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticFamily {
    Branin2D,
    Park4D,
}

impl SyntheticFamily {
    pub fn bounds(self) -> Vec<(f64, f64)> {
        match self {
            SyntheticFamily::Branin2D => vec![(-5.0, 10.0), (0.0, 15.0)],
            SyntheticFamily::Park4D => vec![(0.0, 1.0); 4],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SyntheticFamily::Branin2D => "branin",
            SyntheticFamily::Park4D => "park",
        }
    }

    /// Native (minimization) value.
    pub fn native(self, x: &[f64], fidelity: Fidelity, alpha: f64) -> Result<f64> {
        match self {
            SyntheticFamily::Branin2D => branin(x, fidelity, alpha),
            SyntheticFamily::Park4D => park(x, fidelity, alpha),
        }
    }

    /// Native minimum of the high-fidelity function.
    pub fn native_minimum(self) -> f64 {
        match self {
            SyntheticFamily::Branin2D => BRANIN_MINIMUM,
            // x₄ = 0 removes the square-root term; x₁ at its floor and x₃ = 0
            // minimize the remaining product.
            SyntheticFamily::Park4D => PARK_X1_FLOOR * E,
        }
    }
}

/// A synthetic family with its bias `alpha`, wrapped as a maximization
/// problem (values are negated).
#[derive(Clone, Debug)]
pub struct SyntheticProblem {
    family: SyntheticFamily,
    alpha: f64,
    fidelity_model: FidelityModel,
    space: SearchSpace,
}

impl SyntheticProblem {
    pub fn new(family: SyntheticFamily, alpha: f64, rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config("alpha", format!("{alpha} must lie in [0, 1]")));
        }
        Ok(SyntheticProblem {
            family,
            alpha,
            fidelity_model: FidelityModel::new(rho)?,
            space: SearchSpace::continuous(family.bounds())?,
        })
    }

    pub fn family(&self) -> SyntheticFamily {
        self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Problem for SyntheticProblem {
    fn name(&self) -> &str {
        self.family.name()
    }

    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn fidelity_model(&self) -> &FidelityModel {
        &self.fidelity_model
    }

    fn evaluate(&self, x: &DesignPoint, fidelity: Fidelity) -> Result<f64> {
        match x {
            DesignPoint::Continuous(v) => Ok(-self.family.native(v, fidelity, self.alpha)?),
            DesignPoint::Candidate(_) => Err(Error::Mode("synthetic problems take continuous inputs".into())),
        }
    }

    fn optimum(&self) -> f64 {
        -self.family.native_minimum()
    }
}
