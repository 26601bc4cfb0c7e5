//! Benchmark problems. Every problem is a maximization over its search
//! space with a known high-fidelity optimum.

mod informativeness;
mod synthetic;
mod tabular;

pub use informativeness::{estimate_informativeness, r_squared_from_pairs, InformativenessReport};
pub use synthetic::{branin, park, SyntheticFamily, SyntheticProblem, BRANIN_MINIMUM, PARK_X1_FLOOR};
pub use tabular::{degrade_lf, load_tabular, parse_tabular, DegradeReport, TabularOptions, TabularProblem};

use crate::error::Result;
use crate::space::{DesignPoint, Fidelity, FidelityModel, SearchSpace};

/// A two-fidelity black box with a known optimum.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;
    fn space(&self) -> &SearchSpace;
    fn fidelity_model(&self) -> &FidelityModel;
    /// Objective value (larger is better).
    fn evaluate(&self, x: &DesignPoint, fidelity: Fidelity) -> Result<f64>;
    /// Global maximum of the high-fidelity objective.
    fn optimum(&self) -> f64;
}
