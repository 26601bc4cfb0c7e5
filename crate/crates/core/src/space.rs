//! Search spaces, fidelities, observations and campaign traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Tolerance used when comparing accumulated costs against budgets.
pub const COST_EPS: f64 = 1e-9;

/// A candidate input: coordinates in a continuous box (original units) or
/// an index into a candidate table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DesignPoint {
    Continuous(Vec<f64>),
    Candidate(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub id: String,
    pub features: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousSpace {
    bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSpace {
    candidates: Vec<Candidate>,
    dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchSpace {
    Continuous(ContinuousSpace),
    Discrete(DiscreteSpace),
}

impl ContinuousSpace {
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.bounds)
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.bounds)
            .map(|(v, (lo, hi))| lo + v * (hi - lo))
            .collect()
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.len(),
                found: x.len(),
            });
        }
        for (dim, (&value, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if !(value >= lo && value <= hi) {
                return Err(Error::OutOfBounds { dim, value, lo, hi });
            }
        }
        Ok(())
    }
}

impl DiscreteSpace {
    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&Candidate> {
        self.candidates.get(index).ok_or(Error::UnknownCandidate {
            index,
            count: self.candidates.len(),
        })
    }
}

impl SearchSpace {
    pub fn continuous(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidSpace("no dimensions".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidSpace(format!(
                    "dimension {i}: bounds ({lo}, {hi}) need lo < hi"
                )));
            }
        }
        Ok(SearchSpace::Continuous(ContinuousSpace { bounds }))
    }

    pub fn unit_cube(dim: usize) -> Result<Self> {
        Self::continuous(vec![(0.0, 1.0); dim])
    }

    pub fn discrete(candidates: Vec<Candidate>) -> Result<Self> {
        let dim = candidates
            .first()
            .map(|c| c.features.len())
            .ok_or_else(|| Error::InvalidSpace("candidate list is empty".into()))?;
        if dim == 0 {
            return Err(Error::InvalidSpace("candidates have no features".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, c) in candidates.iter().enumerate() {
            if c.features.len() != dim {
                return Err(Error::InvalidSpace(format!(
                    "candidate {i} has {} features, expected {dim}",
                    c.features.len()
                )));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate candidate id `{}`", c.id)));
            }
        }
        Ok(SearchSpace::Discrete(DiscreteSpace { candidates, dim }))
    }

    pub fn dim(&self) -> usize {
        match self {
            SearchSpace::Continuous(s) => s.bounds.len(),
            SearchSpace::Discrete(s) => s.dim,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, SearchSpace::Discrete(_))
    }

    /// Surrogate-facing features: unit-cube coordinates for continuous
    /// spaces, stored (already normalized) features for candidate tables.
    pub fn features(&self, x: &DesignPoint) -> Result<Vec<f64>> {
        match (self, x) {
            (SearchSpace::Continuous(s), DesignPoint::Continuous(v)) => {
                s.check(v)?;
                Ok(s.to_unit(v))
            }
            (SearchSpace::Discrete(s), DesignPoint::Candidate(i)) => Ok(s.get(*i)?.features.clone()),
            _ => Err(Error::Mode("design point kind does not match the search space".into())),
        }
    }
}

/// The two supported information sources.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fidelity {
    Low,
    High,
}

impl Fidelity {
    pub const ALL: [Fidelity; 2] = [Fidelity::Low, Fidelity::High];

    /// The fidelity coordinate `l` fed to the kernel.
    pub fn value(self) -> f64 {
        match self {
            Fidelity::Low => 0.0,
            Fidelity::High => 1.0,
        }
    }

    pub fn from_value(l: f64) -> Result<Self> {
        if l == 0.0 {
            Ok(Fidelity::Low)
        } else if l == 1.0 {
            Ok(Fidelity::High)
        } else {
            Err(Error::config("fidelity", format!("{l} is not one of 0, 1")))
        }
    }
}

/// Two fidelity levels, `l = 0` (cost `rho`) and `l = 1` (cost 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityModel {
    rho: f64,
}

impl FidelityModel {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::config("rho", format!("{rho} must lie in (0, 1]")));
        }
        Ok(FidelityModel { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn cost(&self, fidelity: Fidelity) -> f64 {
        match fidelity {
            Fidelity::Low => self.rho,
            Fidelity::High => 1.0,
        }
    }

    pub fn levels(&self) -> [f64; 2] {
        [0.0, 1.0]
    }

    pub fn costs(&self) -> [f64; 2] {
        [self.rho, 1.0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: DesignPoint,
    pub fidelity: Fidelity,
    pub y: f64,
    pub cost: f64,
}

/// Ordered observations of one campaign with running cost totals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignTrace {
    seed: u64,
    observations: Vec<Observation>,
    cumulative_costs: Vec<f64>,
    initial_count: usize,
}

impl CampaignTrace {
    pub fn new(seed: u64) -> Self {
        CampaignTrace {
            seed,
            observations: Vec::new(),
            cumulative_costs: Vec::new(),
            initial_count: 0,
        }
    }

    /// Builds a trace from a list of observations, the first
    /// `initial_count` of which form the initial design.
    pub fn from_observations(
        seed: u64,
        observations: Vec<Observation>,
        initial_count: usize,
    ) -> Result<Self> {
        if initial_count > observations.len() {
            return Err(Error::Inconsistent(format!(
                "initial count {initial_count} exceeds {} observations",
                observations.len()
            )));
        }
        let mut trace = CampaignTrace::new(seed);
        for o in observations {
            trace.push(o)?;
        }
        trace.initial_count = initial_count;
        Ok(trace)
    }

    pub fn push(&mut self, obs: Observation) -> Result<()> {
        if !(obs.cost > 0.0 && obs.cost.is_finite()) {
            return Err(Error::Inconsistent(format!(
                "observation cost {} must be positive",
                obs.cost
            )));
        }
        let last = self.cumulative_costs.last().copied().unwrap_or(0.0);
        self.cumulative_costs.push(last + obs.cost);
        self.observations.push(obs);
        Ok(())
    }

    /// Marks everything recorded so far as the initial design.
    pub fn close_initial_design(&mut self) {
        self.initial_count = self.observations.len();
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn cumulative_costs(&self) -> &[f64] {
        &self.cumulative_costs
    }

    pub fn initial_count(&self) -> usize {
        self.initial_count
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn total_cost(&self) -> f64 {
        self.cumulative_costs.last().copied().unwrap_or(0.0)
    }

    pub fn best_hf(&self) -> Option<f64> {
        self.observations
            .iter()
            .filter(|o| o.fidelity == Fidelity::High)
            .map(|o| o.y)
            .fold(None, |acc, y| Some(acc.map_or(y, |a: f64| a.max(y))))
    }

    pub fn is_single_fidelity(&self) -> bool {
        self.observations.iter().all(|o| o.fidelity == Fidelity::High)
    }
}

/// Latin hypercube design in the unit cube: every coordinate places exactly
/// one point in each of the `n` equal-width strata.
pub fn latin_hypercube_unit(dim: usize, n: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for d in 0..dim {
        // Fisher-Yates, driven by the stream directly for platform stability.
        for i in (1..n).rev() {
            let j = (rng.uniform() * (i + 1) as f64) as usize;
            perm.swap(i, j.min(i));
        }
        for (p, &stratum) in points.iter_mut().zip(&perm) {
            let jitter = 1e-9 + rng.uniform() * (1.0 - 2e-9);
            p[d] = (stratum as f64 + jitter) / n as f64;
        }
    }
    points
}

pub fn latin_hypercube(space: &SearchSpace, n: usize, rng: &mut RngStream) -> Result<Vec<DesignPoint>> {
    let SearchSpace::Continuous(s) = space else {
        return Err(Error::UnsupportedSpace(
            "latin hypercube sampling needs a continuous space; use uniform_sample for tables",
        ));
    };
    if n == 0 {
        return Err(Error::config("n", "latin hypercube needs at least one point"));
    }
    Ok(latin_hypercube_unit(s.bounds.len(), n, rng)
        .into_iter()
        .map(|u| DesignPoint::Continuous(s.from_unit(&u)))
        .collect())
}

/// i.i.d. uniform points in a box, or candidates drawn without replacement.
pub fn uniform_sample(space: &SearchSpace, n: usize, rng: &mut RngStream) -> Result<Vec<DesignPoint>> {
    match space {
        SearchSpace::Continuous(s) => Ok((0..n)
            .map(|_| {
                DesignPoint::Continuous(
                    s.bounds.iter().map(|&(lo, hi)| rng.uniform_in(lo, hi)).collect(),
                )
            })
            .collect()),
        SearchSpace::Discrete(s) => {
            let count = s.candidates.len();
            if n > count {
                return Err(Error::Capacity {
                    requested: n,
                    available: count,
                });
            }
            // Partial Fisher-Yates over the index list.
            let mut idx: Vec<usize> = (0..count).collect();
            for i in 0..n {
                let j = i + ((rng.uniform() * (count - i) as f64) as usize).min(count - i - 1);
                idx.swap(i, j);
            }
            Ok(idx[..n].iter().map(|&i| DesignPoint::Candidate(i)).collect())
        }
    }
}
