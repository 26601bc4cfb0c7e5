//! Simple regret, budget alignment of multi-fidelity traces, and the
//! discount Δ comparing the budgets both methods need to reach a target regret.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{CampaignTrace, Fidelity, COST_EPS};

/// Default regret relaxation factor τ.
pub const DEFAULT_TAU: f64 = 2.0;

/// Regret values on the cumulative-cost grid of a single-fidelity run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub values: Vec<f64>,
    pub costs: Vec<f64>,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn best(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }
}

fn regret_of(y: f64, f_star: f64) -> Result<f64> {
    let r = f_star - y;
    if r < -1e-9 * f_star.abs().max(1.0) {
        return Err(Error::OptimumExceeded {
            observed: y,
            optimum: f_star,
        });
    }
    Ok(r.max(0.0))
}

/// `r_i = f* − max(y_1..y_i)` over a single-fidelity trace, initial design included.
pub fn simple_regret_sf(trace: &CampaignTrace, f_star: f64) -> Result<RegretTrace> {
    if !trace.is_single_fidelity() {
        return Err(Error::Mode("single-fidelity regret needs a trace with high-fidelity observations only".into()));
    }
    if trace.is_empty() {
        return Err(Error::Empty("trace"));
    }
    let mut best = f64::INFINITY;
    let mut values = Vec::with_capacity(trace.len());
    for o in trace.observations() {
        best = best.min(regret_of(o.y, f_star)?);
        values.push(best);
    }
    Ok(RegretTrace {
        values,
        costs: trace.cumulative_costs().to_vec(),
    })
}

/// Aligns a multi-fidelity trace to `sf_costs`: entry `i` is the smallest
/// high-fidelity regret among observations whose cumulative cost does not
/// exceed `sf_costs[i]`. Low-fidelity observations never contribute.
pub fn simple_regret_mf(mf_trace: &CampaignTrace, sf_costs: &[f64], f_star: f64) -> Result<RegretTrace> {
    let hf: Vec<(f64, f64)> = mf_trace
        .observations()
        .iter()
        .zip(mf_trace.cumulative_costs())
        .filter(|(o, _)| o.fidelity == Fidelity::High)
        .map(|(o, &c)| regret_of(o.y, f_star).map(|r| (c, r)))
        .collect::<Result<_>>()?;
    if sf_costs.is_empty() {
        return Err(Error::Empty("single-fidelity cost grid"));
    }
    // Both sequences are sorted by cost, so one sweep suffices.
    let mut values = Vec::with_capacity(sf_costs.len());
    let mut k = 0;
    let mut best = f64::INFINITY;
    for &budget in sf_costs {
        while k < hf.len() && hf[k].0 <= budget + COST_EPS {
            best = best.min(hf[k].1);
            k += 1;
        }
        if best == f64::INFINITY {
            return Err(Error::Alignment { budget });
        }
        values.push(best);
    }
    Ok(RegretTrace {
        values,
        costs: sf_costs.to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscountReport {
    pub delta: f64,
    pub r_star_corrected: f64,
    /// `None` when the single-fidelity run never reaches the target.
    pub b_sf: Option<f64>,
    pub b_mf: f64,
    pub tau: f64,
}

fn budget_to_reach(trace: &RegretTrace, target: f64) -> Option<f64> {
    trace
        .values
        .iter()
        .zip(&trace.costs)
        .find(|(r, _)| **r <= target)
        .map(|(_, &c)| c)
}

/// Δ = (b_sf − b_mf) / b_sf at the target regret `τ · min(mf)`, or 1 when
/// the single-fidelity run never reaches it.
pub fn discount(sf: &RegretTrace, mf: &RegretTrace, tau: f64) -> Result<DiscountReport> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::config("tau", format!("{tau} must be positive")));
    }
    if sf.values.len() != sf.costs.len() || mf.values.len() != mf.costs.len() {
        return Err(Error::Inconsistent("regret trace values and costs differ in length".into()));
    }
    let best_mf = mf.best().ok_or(Error::Empty("multi-fidelity regret trace"))?;
    let target = best_mf * tau;
    let b_mf = budget_to_reach(mf, target)
        .ok_or_else(|| Error::Inconsistent(format!("multi-fidelity run never reaches its own target {target}")))?;
    let b_sf = budget_to_reach(sf, target);
    let delta = match b_sf {
        Some(b) => (b - b_mf) / b,
        None => 1.0,
    };
    Ok(DiscountReport {
        delta,
        r_star_corrected: target,
        b_sf,
        b_mf,
        tau,
    })
}

/// Regret traces and Δ for one seed-paired SFBO/MFBO comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub sf: RegretTrace,
    pub mf: RegretTrace,
    pub report: DiscountReport,
}

pub fn compare(sf_trace: &CampaignTrace, mf_trace: &CampaignTrace, f_star: f64, tau: f64) -> Result<PairedComparison> {
    if sf_trace.seed() != mf_trace.seed() {
        return Err(Error::Inconsistent(format!(
            "seed pairing violated: SFBO seed {} vs MFBO seed {}",
            sf_trace.seed(),
            mf_trace.seed()
        )));
    }
    let sf = simple_regret_sf(sf_trace, f_star)?;
    let mf = simple_regret_mf(mf_trace, &sf.costs, f_star)?;
    let report = discount(&sf, &mf, tau)?;
    Ok(PairedComparison { sf, mf, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Mean, population standard deviation and range.
pub fn aggregate(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::Empty("nothing to aggregate"));
    }
    Ok(Summary {
        mean: crate::stats::mean(values),
        std: crate::stats::std_dev(values),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        n: values.len(),
    })
}

pub fn aggregate_reports(reports: &[DiscountReport]) -> Result<Summary> {
    aggregate(&reports.iter().map(|r| r.delta).collect::<Vec<_>>())
}

/// One row of the averaged regret curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretCurveRow {
    pub step: usize,
    pub sf_cost: f64,
    pub regret_sf_mean: f64,
    pub regret_sf_std: f64,
    pub regret_mf_mean: f64,
    pub regret_mf_std: f64,
}

/// Per-step mean and spread over seeds. Shorter traces (early space
/// exhaustion) hold their last value.
pub fn regret_curve(pairs: &[PairedComparison]) -> Result<Vec<RegretCurveRow>> {
    let longest = pairs
        .iter()
        .max_by_key(|p| p.sf.len())
        .ok_or(Error::Empty("no paired comparisons"))?;
    let at = |t: &RegretTrace, i: usize| t.values[i.min(t.len() - 1)];
    Ok((0..longest.sf.len())
        .map(|i| {
            let sf: Vec<f64> = pairs.iter().map(|p| at(&p.sf, i)).collect();
            let mf: Vec<f64> = pairs.iter().map(|p| at(&p.mf, i)).collect();
            RegretCurveRow {
                step: i + 1,
                sf_cost: longest.sf.costs[i],
                regret_sf_mean: crate::stats::mean(&sf),
                regret_sf_std: crate::stats::std_dev(&sf),
                regret_mf_mean: crate::stats::mean(&mf),
                regret_mf_std: crate::stats::std_dev(&mf),
            }
        })
        .collect())
}
