//! Single- and multi-fidelity optimization loops.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::{next_query, AcquisitionFamily, AcquisitionSpec, FidelityMode};
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::space::{latin_hypercube, uniform_sample, CampaignTrace, DesignPoint, Fidelity, Observation, SearchSpace, COST_EPS};
use crate::surrogate::{fit_with, FitOptions, KernelParams, TrainingData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sfbo,
    Mfbo,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sfbo => "sfbo",
            Mode::Mfbo => "mfbo",
        }
    }

    fn fidelity_mode(self) -> FidelityMode {
        match self {
            Mode::Sfbo => FidelityMode::SingleFidelity,
            Mode::Mfbo => FidelityMode::MultiFidelity,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub acquisition: AcquisitionFamily,
    /// Budget in units of high-fidelity queries.
    pub total_budget: f64,
    pub init_fraction: f64,
    pub init_hf_share: f64,
    /// Local searches for the first hyperparameter fit.
    pub restarts: usize,
    /// Extra random local searches on later fits, which always start from
    /// the previous optimum.
    pub refit_restarts: usize,
    pub mes_max_samples: usize,
    pub candidate_grid_size: usize,
}

impl CampaignConfig {
    pub fn new(mode: Mode, acquisition: AcquisitionFamily, total_budget: f64) -> Self {
        CampaignConfig {
            mode,
            acquisition,
            total_budget,
            init_fraction: 0.1,
            init_hf_share: 0.5,
            restarts: 8,
            refit_restarts: 1,
            mes_max_samples: 16,
            candidate_grid_size: 2048,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_budget > 0.0 && self.total_budget.is_finite()) {
            return Err(Error::config("total_budget", format!("{} must be positive", self.total_budget)));
        }
        if !(self.init_fraction > 0.0 && self.init_fraction < 1.0) {
            return Err(Error::config("init_fraction", format!("{} must lie in (0, 1)", self.init_fraction)));
        }
        if !(self.init_hf_share > 0.0 && self.init_hf_share < 1.0) {
            return Err(Error::config("init_hf_share", format!("{} must lie in (0, 1)", self.init_hf_share)));
        }
        if self.restarts == 0 {
            return Err(Error::config("restarts", "must be at least 1"));
        }
        self.acquisition_spec().validate()
    }

    pub fn acquisition_spec(&self) -> AcquisitionSpec {
        let mut spec = AcquisitionSpec::new(self.acquisition, self.mode.fidelity_mode());
        spec.mes_max_samples = self.mes_max_samples;
        spec.candidate_grid_size = self.candidate_grid_size;
        spec
    }
}

/// Number of initial points per fidelity, `(high, low)`, before any
/// capping by the size of a candidate table.
pub fn initial_counts(config: &CampaignConfig, rho: f64) -> (usize, usize) {
    let init_budget = config.total_budget * config.init_fraction;
    match config.mode {
        Mode::Sfbo => (((init_budget + COST_EPS).floor() as usize).max(2), 0),
        Mode::Mfbo => {
            let hf_budget = init_budget * config.init_hf_share;
            let lf_budget = init_budget - hf_budget;
            let n_hf = ((hf_budget + COST_EPS).floor() as usize).max(2);
            let n_lf = (lf_budget / rho + COST_EPS).floor() as usize;
            (n_hf, n_lf)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    BudgetExhausted,
    SpaceExhausted,
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub mode: Mode,
    pub acquisition: AcquisitionFamily,
    pub trace: CampaignTrace,
    pub best_hf_value: f64,
    pub total_cost_spent: f64,
    pub terminated_reason: TerminationReason,
}

impl CampaignResult {
    /// Fraction of the sequential (post-initial-design) queries made at the
    /// high fidelity; `None` when there were none.
    pub fn hf_query_fraction(&self) -> Option<f64> {
        let seq = &self.trace.observations()[self.trace.initial_count()..];
        if seq.is_empty() {
            return None;
        }
        let hf = seq.iter().filter(|o| o.fidelity == Fidelity::High).count();
        Some(hf as f64 / seq.len() as f64)
    }
}

fn draw(space: &SearchSpace, n: usize, rng: &mut RngStream) -> Result<Vec<DesignPoint>> {
    match space {
        SearchSpace::Continuous(_) if n > 0 => latin_hypercube(space, n, rng),
        SearchSpace::Continuous(_) => Ok(Vec::new()),
        SearchSpace::Discrete(s) => uniform_sample(space, n.min(s.len()), rng),
    }
}

pub fn run_campaign(problem: &dyn Problem, config: &CampaignConfig, seed: u64) -> Result<CampaignResult> {
    config.validate()?;
    let space = problem.space();
    let model = problem.fidelity_model();
    let (n_hf, n_lf) = initial_counts(config, model.rho());
    let init_cost = n_hf as f64 + n_lf as f64 * model.rho();
    if init_cost > config.total_budget + COST_EPS {
        return Err(Error::config(
            "total_budget",
            format!("{} cannot pay for the initial design costing {init_cost}", config.total_budget),
        ));
    }

    let root = RngStream::new(seed);
    let mut design_rng = root.derive(1);
    let mut fit_rng = root.derive(2);
    let mut acq_rng = root.derive(3);

    let mut trace = CampaignTrace::new(seed);
    let mut data = TrainingData::empty();
    let record = |trace: &mut CampaignTrace, data: &mut TrainingData, x: DesignPoint, fidelity: Fidelity| -> Result<()> {
        let y = problem.evaluate(&x, fidelity)?;
        data.push(space.features(&x)?, fidelity.value(), y)?;
        trace.push(Observation {
            x,
            fidelity,
            y,
            cost: model.cost(fidelity),
        })
    };
    for x in draw(space, n_hf, &mut design_rng)? {
        record(&mut trace, &mut data, x, Fidelity::High)?;
    }
    for x in draw(space, n_lf, &mut design_rng)? {
        record(&mut trace, &mut data, x, Fidelity::Low)?;
    }
    trace.close_initial_design();

    let levels: &[Fidelity] = match config.mode {
        Mode::Sfbo => &[Fidelity::High],
        Mode::Mfbo => &Fidelity::ALL,
    };
    let spec = config.acquisition_spec();
    let mut warm: Option<KernelParams> = None;
    let reason = loop {
        let remaining = config.total_budget - trace.total_cost();
        let allowed: Vec<Fidelity> = levels
            .iter()
            .copied()
            .filter(|&f| model.cost(f) <= remaining + COST_EPS)
            .collect();
        if allowed.is_empty() {
            break TerminationReason::BudgetExhausted;
        }
        let opts = FitOptions {
            restarts: match warm {
                Some(_) => 1 + config.refit_restarts,
                None => config.restarts,
            },
            warm_start: warm.clone(),
            ..Default::default()
        };
        let state = fit_with(&data, &opts, &mut fit_rng)?;
        warm = Some(state.params().clone());
        let decision = match next_query(&state, space, model, &spec, trace.observations(), &allowed, &mut acq_rng) {
            Ok(d) => d,
            Err(Error::Exhausted) => break TerminationReason::SpaceExhausted,
            Err(e) => return Err(e),
        };
        record(&mut trace, &mut data, decision.x, decision.fidelity)?;
    };

    let best_hf_value = trace
        .best_hf()
        .ok_or(Error::InsufficientData { needed: 1, found: 0 })?;
    Ok(CampaignResult {
        mode: config.mode,
        acquisition: config.acquisition,
        total_cost_spent: trace.total_cost(),
        trace,
        best_hf_value,
        terminated_reason: reason,
    })
}

/// Runs one campaign per seed, in parallel on the current rayon pool.
/// Failures are attributed to their seed and do not affect other seeds.
pub fn run_suite(problem: &dyn Problem, config: &CampaignConfig, seeds: &[u64]) -> Result<Vec<Result<CampaignResult>>> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "seed list is empty"));
    }
    config.validate()?;
    Ok(seeds
        .par_iter()
        .map(|&seed| {
            run_campaign(problem, config, seed).map_err(|e| Error::Seed {
                seed,
                source: Box::new(e),
            })
        })
        .collect())
}
