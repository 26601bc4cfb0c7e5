//! Reproduction drivers: paired SFBO/MFBO scenarios, the ρ × α sweep,
//! fidelity query ratios and the run-or-skip advisor.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionFamily;
use crate::campaign::{run_campaign, CampaignConfig, CampaignResult, Mode};
use crate::error::{Error, Result};
use crate::metrics::{aggregate, compare, PairedComparison, Summary};
use crate::problems::{estimate_informativeness, Problem, SyntheticFamily, SyntheticProblem};
use crate::rng::RngStream;
use crate::space::{CampaignTrace, Fidelity};

/// Default cost-ratio threshold of the advisor.
pub const ADVISOR_TAU1: f64 = 0.2;
/// Default informativeness threshold of the advisor.
pub const ADVISOR_TAU2: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    #[serde(rename = "run_MFBO")]
    RunMfbo,
    #[serde(rename = "run_SFBO")]
    RunSfbo,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::RunMfbo => "run_MFBO",
            Verdict::RunSfbo => "run_SFBO",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdvisorVerdict {
    pub rho: f64,
    pub r_squared: f64,
    pub verdict: Verdict,
    pub tau1: f64,
    pub tau2: f64,
    pub cheap_enough: bool,
    pub informative_enough: bool,
}

pub fn advise(rho: f64, r_squared: f64) -> Result<AdvisorVerdict> {
    advise_with(rho, r_squared, ADVISOR_TAU1, ADVISOR_TAU2)
}

/// Recommends MFBO iff `rho < tau1` and `r_squared > tau2`.
pub fn advise_with(rho: f64, r_squared: f64, tau1: f64, tau2: f64) -> Result<AdvisorVerdict> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::config("rho", format!("{rho} must be positive")));
    }
    if r_squared.is_nan() {
        return Err(Error::config("r2", "is not a number"));
    }
    let cheap_enough = rho < tau1;
    let informative_enough = r_squared.max(0.0) > tau2;
    Ok(AdvisorVerdict {
        rho,
        r_squared,
        verdict: if cheap_enough && informative_enough {
            Verdict::RunMfbo
        } else {
            Verdict::RunSfbo
        },
        tau1,
        tau2,
        cheap_enough,
        informative_enough,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRatio {
    pub hf_fraction: f64,
    pub lf_fraction: f64,
    pub hf_count: usize,
    pub lf_count: usize,
}

/// Share of each fidelity among the sequential (post-initial-design) queries.
pub fn fidelity_query_ratio(trace: &CampaignTrace) -> Result<QueryRatio> {
    let seq = &trace.observations()[trace.initial_count()..];
    if seq.is_empty() {
        return Err(Error::Empty("no sequential queries in trace"));
    }
    let hf_count = seq.iter().filter(|o| o.fidelity == Fidelity::High).count();
    let lf_count = seq.len() - hf_count;
    Ok(QueryRatio {
        hf_fraction: hf_count as f64 / seq.len() as f64,
        lf_fraction: lf_count as f64 / seq.len() as f64,
        hf_count,
        lf_count,
    })
}

/// Spearman rank correlation (average ranks for ties). `None` when either
/// variable is constant or fewer than two points are given.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let mx = crate::stats::mean(&rx);
    let my = crate::stats::mean(&ry);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Paired SFBO/MFBO outcome of one acquisition family over a seed list.
#[derive(Clone, Debug)]
pub struct FamilyOutcome {
    pub family: AcquisitionFamily,
    pub seeds: Vec<u64>,
    pub sf: Vec<CampaignResult>,
    pub mf: Vec<CampaignResult>,
    pub comparisons: Vec<PairedComparison>,
    pub delta: Summary,
}

impl FamilyOutcome {
    pub fn deltas(&self) -> Vec<f64> {
        self.comparisons.iter().map(|c| c.report.delta).collect()
    }

    /// Mean sequential HF fraction over the MFBO runs.
    pub fn mean_hf_fraction(&self) -> Result<f64> {
        let f: Vec<f64> = self
            .mf
            .iter()
            .map(|r| fidelity_query_ratio(&r.trace).map(|q| q.hf_fraction))
            .collect::<Result<_>>()?;
        Ok(aggregate(&f)?.mean)
    }
}

/// Runs seed-paired SFBO and MFBO campaigns for each family and computes Δ.
pub fn run_scenario(
    problem: &dyn Problem,
    base: &CampaignConfig,
    families: &[AcquisitionFamily],
    seeds: &[u64],
    tau: f64,
) -> Result<Vec<FamilyOutcome>> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "seed list is empty"));
    }
    if families.is_empty() {
        return Err(Error::config("families", "no acquisition family given"));
    }
    let jobs: Vec<(AcquisitionFamily, Mode, u64)> = families
        .iter()
        .flat_map(|&f| [Mode::Sfbo, Mode::Mfbo].into_iter().flat_map(move |m| seeds.iter().map(move |&s| (f, m, s))))
        .collect();
    let results: Vec<Result<CampaignResult>> = jobs
        .par_iter()
        .map(|&(family, mode, seed)| {
            let config = CampaignConfig {
                mode,
                acquisition: family,
                ..base.clone()
            };
            run_campaign(problem, &config, seed).map_err(|e| Error::Seed {
                seed,
                source: Box::new(e),
            })
        })
        .collect();
    let mut results = results.into_iter();
    let mut out = Vec::with_capacity(families.len());
    for &family in families {
        let sf: Vec<CampaignResult> = results.by_ref().take(seeds.len()).collect::<Result<_>>()?;
        let mf: Vec<CampaignResult> = results.by_ref().take(seeds.len()).collect::<Result<_>>()?;
        let comparisons: Vec<PairedComparison> = sf
            .iter()
            .zip(&mf)
            .map(|(a, b)| compare(&a.trace, &b.trace, problem.optimum(), tau))
            .collect::<Result<_>>()?;
        let delta = aggregate(&comparisons.iter().map(|c| c.report.delta).collect::<Vec<_>>())?;
        out.push(FamilyOutcome {
            family,
            seeds: seeds.to_vec(),
            sf,
            mf,
            comparisons,
            delta,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: SyntheticFamily,
    pub rho_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub families: Vec<AcquisitionFamily>,
    pub seeds: Vec<u64>,
    /// Budget and optimizer settings shared by every campaign; mode and
    /// acquisition family are overridden per run.
    pub campaign: CampaignConfig,
    pub r2_samples: usize,
    pub master_seed: u64,
    pub tau: f64,
}

impl SweepSpec {
    pub fn default_rho() -> Vec<f64> {
        vec![0.02, 0.05, 0.1, 0.2, 0.33, 0.5]
    }

    pub fn default_alpha() -> Vec<f64> {
        vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub rho: f64,
    pub alpha: f64,
    pub r_squared: f64,
    pub family: AcquisitionFamily,
    pub deltas: Vec<f64>,
    pub hf_fractions: Vec<f64>,
    pub status: CellStatus,
}

impl SweepCell {
    pub fn delta_mean(&self) -> f64 {
        if self.deltas.is_empty() {
            f64::NAN
        } else {
            crate::stats::mean(&self.deltas)
        }
    }

    pub fn delta_std(&self) -> f64 {
        if self.deltas.is_empty() {
            f64::NAN
        } else {
            crate::stats::std_dev(&self.deltas)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub cells: Vec<SweepCell>,
    /// Estimated R² for each α, in grid order.
    pub r_squared: Vec<(f64, f64)>,
}

impl SweepGrid {
    /// Spearman correlations of successful cells' mean Δ with ρ and with R².
    pub fn trend(&self, family: AcquisitionFamily) -> (Option<f64>, Option<f64>) {
        let ok: Vec<&SweepCell> = self
            .cells
            .iter()
            .filter(|c| c.family == family && c.status == CellStatus::Ok)
            .collect();
        let d: Vec<f64> = ok.iter().map(|c| c.delta_mean()).collect();
        let rho: Vec<f64> = ok.iter().map(|c| c.rho).collect();
        let r2: Vec<f64> = ok.iter().map(|c| c.r_squared).collect();
        (spearman(&rho, &d), spearman(&r2, &d))
    }
}

fn attribute(rho: f64, alpha: f64, e: &Error) -> String {
    format!("cell rho={rho} alpha={alpha}: {e}")
}

/// Runs the ρ × α sweep. Single-fidelity runs depend on neither ρ nor α
/// (HF costs 1 and ignores the bias), so they are run once per seed and
/// paired with every cell. A failing cell is flagged and the rest complete.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    if spec.seeds.is_empty() {
        return Err(Error::config("seeds", "seed list is empty"));
    }
    if spec.rho_values.is_empty() || spec.alpha_values.is_empty() {
        return Err(Error::config("sweep", "rho_values and alpha_values must be non-empty"));
    }
    if spec.families.is_empty() {
        return Err(Error::config("families", "no acquisition family given"));
    }
    spec.campaign.validate()?;
    let root = RngStream::new(spec.master_seed);

    let r_squared: Vec<(f64, f64)> = spec
        .alpha_values
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let r2 = SyntheticProblem::new(spec.family, alpha, 1.0)
                .and_then(|p| estimate_informativeness(&p, spec.r2_samples, &mut root.derive(i as u64)))
                .map(|r| r.r_squared)
                .unwrap_or(f64::NAN);
            (alpha, r2)
        })
        .collect();

    // The reference problem for SF runs: any valid α and ρ give identical HF behaviour.
    let sf_problem = SyntheticProblem::new(spec.family, 1.0, 1.0)?;
    let optimum = sf_problem.optimum();
    let sf_jobs: Vec<(AcquisitionFamily, u64)> = spec
        .families
        .iter()
        .flat_map(|&f| spec.seeds.iter().map(move |&s| (f, s)))
        .collect();
    let sf_runs: Vec<Result<CampaignTrace>> = sf_jobs
        .par_iter()
        .map(|&(family, seed)| {
            let config = CampaignConfig {
                mode: Mode::Sfbo,
                acquisition: family,
                ..spec.campaign.clone()
            };
            run_campaign(&sf_problem, &config, seed).map(|r| r.trace)
        })
        .collect();

    let mut mf_jobs = Vec::new();
    for &family in &spec.families {
        for &rho in &spec.rho_values {
            for &alpha in &spec.alpha_values {
                for &seed in &spec.seeds {
                    mf_jobs.push((family, rho, alpha, seed));
                }
            }
        }
    }
    let mf_runs: Vec<Result<CampaignResult>> = mf_jobs
        .par_iter()
        .map(|&(family, rho, alpha, seed)| {
            let problem = SyntheticProblem::new(spec.family, alpha, rho)?;
            let config = CampaignConfig {
                mode: Mode::Mfbo,
                acquisition: family,
                ..spec.campaign.clone()
            };
            run_campaign(&problem, &config, seed)
        })
        .collect();

    let n_seeds = spec.seeds.len();
    let mut cells = Vec::new();
    let mut mf_iter = mf_runs.into_iter();
    for (fi, &family) in spec.families.iter().enumerate() {
        let sf = &sf_runs[fi * n_seeds..(fi + 1) * n_seeds];
        for &rho in &spec.rho_values {
            for (ai, &alpha) in spec.alpha_values.iter().enumerate() {
                let mf: Vec<Result<CampaignResult>> = mf_iter.by_ref().take(n_seeds).collect();
                let outcome: Result<(Vec<f64>, Vec<f64>)> = (|| {
                    let mut deltas = Vec::with_capacity(n_seeds);
                    let mut fractions = Vec::with_capacity(n_seeds);
                    for (s, m) in sf.iter().zip(&mf) {
                        let s = s.as_ref().map_err(|e| Error::Inconsistent(e.to_string()))?;
                        let m = m.as_ref().map_err(|e| Error::Inconsistent(e.to_string()))?;
                        deltas.push(compare(s, &m.trace, optimum, spec.tau)?.report.delta);
                        fractions.push(fidelity_query_ratio(&m.trace)?.hf_fraction);
                    }
                    Ok((deltas, fractions))
                })();
                let r2 = r_squared[ai].1;
                cells.push(match outcome {
                    Ok((deltas, hf_fractions)) => SweepCell {
                        rho,
                        alpha,
                        r_squared: r2,
                        family,
                        deltas,
                        hf_fractions,
                        status: CellStatus::Ok,
                    },
                    Err(e) => SweepCell {
                        rho,
                        alpha,
                        r_squared: r2,
                        family,
                        deltas: Vec::new(),
                        hf_fractions: Vec::new(),
                        status: CellStatus::Failed(attribute(rho, alpha, &e)),
                    },
                });
            }
        }
    }
    Ok(SweepGrid { cells, r_squared })
}
