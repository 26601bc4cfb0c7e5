//! TOML run configuration. Unknown keys are rejected.
//!
//! ```toml
//! seeds = [0, 1, 2]          # or a count: seeds = 20  (0..20)
//! output_dir = "out/branin"
//! workers = 0                 # 0 = one per hardware thread
//!
//! [problem]
//! kind = "branin"             # branin | park | tabular
//! alpha = 0.8
//! rho = 0.1
//!
//! [campaign]
//! mode = "compare"            # sfbo | mfbo | compare
//! acquisition = ["ei", "mes"]
//! total_budget = 50
//!
//! [sweep]                     # only read by `sweep`
//! rho_values = [0.1, 0.5]
//! alpha_values = [0.2, 0.8]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acquisition::AcquisitionFamily;
use crate::campaign::{CampaignConfig, Mode};
use crate::error::{Error, Result};
use crate::experiments::SweepSpec;
use crate::metrics::DEFAULT_TAU;
use crate::problems::{degrade_lf, load_tabular, DegradeReport, Problem, SyntheticFamily, SyntheticProblem, TabularOptions};
use crate::rng::RngStream;

/// Environment variable overriding `output_dir`.
pub const OUT_DIR_ENV: &str = "MFBO_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedList {
    Count(u64),
    List(Vec<u64>),
}

impl SeedList {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedList::Count(n) => (0..*n).collect(),
            SeedList::List(v) => v.clone(),
        }
    }

    /// Parses `20` (0..20), `3..7`, or `1,5,9`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::config("seeds", format!("cannot parse `{s}`; use N, A..B or a comma list"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once("..") {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a >= b {
                return Err(bad());
            }
            return Ok(SeedList::List((a..b).collect()));
        }
        if s.contains(',') {
            return s
                .split(',')
                .map(|p| p.trim().parse().map_err(|_| bad()))
                .collect::<Result<Vec<u64>>>()
                .map(SeedList::List);
        }
        s.parse().map(SeedList::Count).map_err(|_| bad())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyList {
    One(AcquisitionFamily),
    Many(Vec<AcquisitionFamily>),
}

impl FamilyList {
    pub fn families(&self) -> Vec<AcquisitionFamily> {
        match self {
            FamilyList::One(f) => vec![*f],
            FamilyList::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Branin,
    Park,
    Tabular,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: ProblemKind,
    #[serde(default = "one")]
    pub alpha: f64,
    pub rho: f64,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub feature_columns: Vec<String>,
    #[serde(default = "hf")]
    pub hf_column: String,
    #[serde(default = "lf")]
    pub lf_column: String,
    #[serde(default)]
    pub id_column: Option<String>,
    /// Tabular only: add seeded noise to the LF column until R² drops below this.
    #[serde(default)]
    pub degrade_to_r2: Option<f64>,
    #[serde(default)]
    pub degrade_seed: u64,
}

fn one() -> f64 {
    1.0
}
fn hf() -> String {
    "hf".into()
}
fn lf() -> String {
    "lf".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Sfbo,
    Mfbo,
    Compare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub mode: RunMode,
    pub acquisition: FamilyList,
    pub total_budget: f64,
    #[serde(default = "init_fraction")]
    pub init_fraction: f64,
    #[serde(default = "half")]
    pub init_hf_share: f64,
    #[serde(default = "restarts")]
    pub restarts: usize,
    #[serde(default = "refit_restarts")]
    pub refit_restarts: usize,
    #[serde(default = "mes_samples")]
    pub mes_max_samples: usize,
    #[serde(default = "grid")]
    pub candidate_grid_size: usize,
    #[serde(default = "tau")]
    pub tau: f64,
}

fn init_fraction() -> f64 {
    0.1
}
fn half() -> f64 {
    0.5
}
fn restarts() -> usize {
    8
}
fn refit_restarts() -> usize {
    1
}
fn mes_samples() -> usize {
    16
}
fn grid() -> usize {
    2048
}
fn tau() -> f64 {
    DEFAULT_TAU
}

impl CampaignSection {
    /// Campaign settings for a given mode and family.
    pub fn campaign(&self, mode: Mode, family: AcquisitionFamily) -> CampaignConfig {
        CampaignConfig {
            mode,
            acquisition: family,
            total_budget: self.total_budget,
            init_fraction: self.init_fraction,
            init_hf_share: self.init_hf_share,
            restarts: self.restarts,
            refit_restarts: self.refit_restarts,
            mes_max_samples: self.mes_max_samples,
            candidate_grid_size: self.candidate_grid_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "SweepSpec::default_rho")]
    pub rho_values: Vec<f64>,
    #[serde(default = "SweepSpec::default_alpha")]
    pub alpha_values: Vec<f64>,
    #[serde(default = "r2_samples")]
    pub r2_samples: usize,
    #[serde(default)]
    pub master_seed: u64,
}

fn r2_samples() -> usize {
    1000
}

fn default_seeds() -> SeedList {
    SeedList::Count(20)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seeds")]
    pub seeds: SeedList,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: usize,
    pub problem: ProblemSection,
    pub campaign: CampaignSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

/// A problem built from configuration, with the degradation record if any.
pub struct BuiltProblem {
    pub problem: Box<dyn Problem>,
    pub degrade: Option<DegradeReport>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file. Relative problem paths are
    /// resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(p), Some(dir)) = (&cfg.problem.path, path.parent()) {
            if p.is_relative() {
                let joined = dir.join(p);
                cfg.problem.path = Some(joined);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if !(p.rho > 0.0 && p.rho <= 1.0) {
            return Err(Error::config("problem.rho", format!("{} must lie in (0, 1]", p.rho)));
        }
        if !(0.0..=1.0).contains(&p.alpha) {
            return Err(Error::config("problem.alpha", format!("{} must lie in [0, 1]", p.alpha)));
        }
        if p.kind == ProblemKind::Tabular && p.path.is_none() {
            return Err(Error::config("problem.path", "tabular problems need a CSV path"));
        }
        if p.kind != ProblemKind::Tabular && p.degrade_to_r2.is_some() {
            return Err(Error::config("problem.degrade_to_r2", "only applies to tabular problems"));
        }
        if let Some(t) = p.degrade_to_r2 {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::config("problem.degrade_to_r2", format!("{t} must lie in (0, 1)")));
            }
        }
        let c = &self.campaign;
        if c.acquisition.families().is_empty() {
            return Err(Error::config("campaign.acquisition", "no acquisition family given"));
        }
        if !(c.tau > 0.0) {
            return Err(Error::config("campaign.tau", format!("{} must be positive", c.tau)));
        }
        for f in c.acquisition.families() {
            c.campaign(Mode::Mfbo, f).validate().map_err(|e| match e {
                Error::InvalidConfig { field, reason } => Error::config(format!("campaign.{field}"), reason),
                other => other,
            })?;
        }
        if self.seeds.seeds().is_empty() {
            return Err(Error::config("seeds", "seed list is empty"));
        }
        if let Some(s) = &self.sweep {
            if let Some(r) = s.rho_values.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
                return Err(Error::config("sweep.rho_values", format!("{r} must lie in (0, 1]")));
            }
            if let Some(a) = s.alpha_values.iter().find(|a| !(0.0..=1.0).contains(*a)) {
                return Err(Error::config("sweep.alpha_values", format!("{a} must lie in [0, 1]")));
            }
            if s.r2_samples < 2 {
                return Err(Error::config("sweep.r2_samples", "need at least 2"));
            }
        }
        Ok(())
    }

    /// Output directory: `override_dir`, else `$MFBO_OUT_DIR`, else the
    /// config's `output_dir`, else `./out`.
    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        if let Some(d) = override_dir {
            return d.to_path_buf();
        }
        if let Some(d) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(d);
        }
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn synthetic_family(&self) -> Option<SyntheticFamily> {
        match self.problem.kind {
            ProblemKind::Branin => Some(SyntheticFamily::Branin2D),
            ProblemKind::Park => Some(SyntheticFamily::Park4D),
            ProblemKind::Tabular => None,
        }
    }

    pub fn build_problem(&self) -> Result<BuiltProblem> {
        let p = &self.problem;
        if let Some(family) = self.synthetic_family() {
            return Ok(BuiltProblem {
                problem: Box::new(SyntheticProblem::new(family, p.alpha, p.rho)?),
                degrade: None,
            });
        }
        let path = p.path.as_ref().ok_or_else(|| Error::config("problem.path", "missing"))?;
        let opts = TabularOptions {
            feature_columns: p.feature_columns.clone(),
            hf_column: p.hf_column.clone(),
            lf_column: p.lf_column.clone(),
            id_column: p.id_column.clone(),
        };
        let table = load_tabular(path, &opts, p.rho)?;
        match p.degrade_to_r2 {
            Some(target) => {
                let (table, report) = degrade_lf(&table, target, &mut RngStream::new(p.degrade_seed))?;
                Ok(BuiltProblem {
                    problem: Box::new(table),
                    degrade: Some(report),
                })
            }
            None => Ok(BuiltProblem {
                problem: Box::new(table),
                degrade: None,
            }),
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let family = self
            .synthetic_family()
            .ok_or_else(|| Error::config("problem.kind", "sweeps need a synthetic problem (branin or park)"))?;
        let s = self.sweep.clone().unwrap_or(SweepSection {
            rho_values: SweepSpec::default_rho(),
            alpha_values: SweepSpec::default_alpha(),
            r2_samples: r2_samples(),
            master_seed: 0,
        });
        let families = self.campaign.acquisition.families();
        Ok(SweepSpec {
            family,
            rho_values: s.rho_values,
            alpha_values: s.alpha_values,
            families: families.clone(),
            seeds: self.seeds.seeds(),
            campaign: self.campaign.campaign(Mode::Mfbo, families[0]),
            r2_samples: s.r2_samples,
            master_seed: s.master_seed,
            tau: self.campaign.tau,
        })
    }
}
