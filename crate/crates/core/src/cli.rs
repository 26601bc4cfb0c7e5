//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 data error, 3 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::campaign::{run_suite, CampaignResult, Mode, TerminationReason};
use crate::config::{RunConfig, RunMode, SeedList};
use crate::error::Error;
use crate::experiments::{advise, fidelity_query_ratio, run_scenario, run_sweep};
use crate::io::{self, DiscountFile, FamilyDiscount, HeatmapRow, Manifest, SeedDiscount};
use crate::metrics::regret_curve;
use crate::problems::{estimate_informativeness, r_squared_from_pairs, Problem};
use crate::rng::RngStream;

#[derive(Debug, Parser)]
#[command(name = "mfbo", version, about = "Multi-fidelity Bayesian optimization campaigns and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run SFBO, MFBO or paired campaigns from a config file.
    Run(RunArgs),
    /// Run the ρ × α grid on a synthetic problem and write a heatmap.
    Sweep(SweepArgs),
    /// Recommend MFBO or SFBO from a cost ratio and an LF/HF R².
    Advise(AdviseArgs),
    /// Estimate the R² of HF on LF for a problem or a CSV of pairs.
    #[command(name = "estimate-r2")]
    EstimateR2(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides MFBO_OUT_DIR and the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seeds: a count N (0..N), a range A..B, or a comma list.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Worker threads; 0 uses every hardware thread.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma list of cost ratios replacing the configured grid.
    #[arg(long, value_delimiter = ',')]
    pub rho: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct AdviseArgs {
    #[arg(long)]
    pub rho: f64,
    #[arg(long, conflicts_with = "pairs", required_unless_present = "pairs")]
    pub r2: Option<f64>,
    /// CSV with `hf` and `lf` columns (otherwise the first two columns).
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, conflicts_with = "pairs", required_unless_present = "pairs")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(Error),
    #[error("data error: {0}")]
    Data(Error),
    #[error("runtime error: {0}")]
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::InvalidConfig { .. } | Error::Mode(_) => CliError::Config(e),
            Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_)
            | Error::Parse { .. }
            | Error::MissingColumn { .. }
            | Error::DuplicateId { .. }
            | Error::Empty(_) => CliError::Data(e),
            _ => CliError::Runtime(e),
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mfbo: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Advise(a) => cmd_advise(a),
        Command::EstimateR2(a) => cmd_estimate(a),
    }
}

struct Loaded {
    config: RunConfig,
    sha256: String,
    seeds: Vec<u64>,
    out: PathBuf,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let bytes = fs::read(&common.config)
        .map_err(|e| CliError::Config(Error::config("config", format!("{}: {e}", common.config.display()))))?;
    let mut config = RunConfig::load(&common.config).map_err(CliError::Config)?;
    if let Some(s) = &common.seeds {
        config.seeds = SeedList::parse(s).map_err(CliError::Config)?;
    }
    if let Some(w) = common.workers {
        config.workers = w;
    }
    config.validate().map_err(CliError::Config)?;
    let out = config.output_dir(common.out.as_deref());
    fs::create_dir_all(&out).map_err(|e| CliError::Data(Error::io(&out, e)))?;
    Ok(Loaded {
        sha256: hex::encode(Sha256::digest(&bytes)),
        seeds: config.seeds.seeds(),
        config,
        out,
    })
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(Error::Inconsistent(format!("thread pool: {e}"))))?;
    Ok(pool.install(f))
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct RunSummary {
    seed: u64,
    mode: String,
    acqf_family: String,
    best_hf_value: f64,
    simple_regret: f64,
    total_cost_spent: f64,
    hf_query_fraction: Option<f64>,
    terminated_reason: TerminationReason,
}

#[derive(Serialize)]
struct SummaryFile {
    problem: String,
    optimum: f64,
    runs: Vec<RunSummary>,
    failures: Vec<String>,
}

fn summarize(r: &CampaignResult, optimum: f64) -> RunSummary {
    RunSummary {
        seed: r.trace.seed(),
        mode: r.mode.as_str().to_string(),
        acqf_family: r.acquisition.to_string(),
        best_hf_value: r.best_hf_value,
        simple_regret: (optimum - r.best_hf_value).max(0.0),
        total_cost_spent: r.total_cost_spent,
        hf_query_fraction: fidelity_query_ratio(&r.trace).ok().map(|q| q.hf_fraction),
        terminated_reason: r.terminated_reason,
    }
}

fn write_trace_file(dir: &Path, r: &CampaignResult, files: &mut Vec<String>) -> Result<(), CliError> {
    let name = format!("traces/{}_{}_seed{}.csv", r.mode.as_str(), r.acquisition, r.trace.seed());
    let path = dir.join(&name);
    io::write_trace(io::create_file(&path)?, &r.trace)?;
    files.push(name);
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let Loaded { config, sha256, seeds, out } = load(&args.common)?;
    let built = config.build_problem()?;
    let problem: &dyn Problem = built.problem.as_ref();
    let families = config.campaign.acquisition.families();
    let traces_dir = out.join("traces");
    fs::create_dir_all(&traces_dir).map_err(|e| CliError::Data(Error::io(&traces_dir, e)))?;
    let mut files = Vec::new();
    let mut summary = SummaryFile {
        problem: problem.name().to_string(),
        optimum: problem.optimum(),
        runs: Vec::new(),
        failures: Vec::new(),
    };

    match config.campaign.mode {
        RunMode::Sfbo | RunMode::Mfbo => {
            let mode = if config.campaign.mode == RunMode::Sfbo { Mode::Sfbo } else { Mode::Mfbo };
            for &family in &families {
                let cc = config.campaign.campaign(mode, family);
                let results = with_workers(config.workers, || run_suite(problem, &cc, &seeds))??;
                for r in results {
                    match r {
                        Ok(r) => {
                            write_trace_file(&out, &r, &mut files)?;
                            summary.runs.push(summarize(&r, problem.optimum()));
                        }
                        Err(e) => summary.failures.push(format!("{family}: {e}")),
                    }
                }
            }
        }
        RunMode::Compare => {
            let base = config.campaign.campaign(Mode::Mfbo, families[0]);
            let outcomes = with_workers(config.workers, || run_scenario(problem, &base, &families, &seeds, config.campaign.tau))??;
            let mut discount = DiscountFile {
                problem: problem.name().to_string(),
                tau: config.campaign.tau,
                families: Vec::new(),
            };
            for o in &outcomes {
                for r in o.sf.iter().chain(&o.mf) {
                    write_trace_file(&out, r, &mut files)?;
                    summary.runs.push(summarize(r, problem.optimum()));
                }
                let name = format!("regret_{}.csv", o.family);
                io::write_regret_curve(io::create_file(&out.join(&name))?, &regret_curve(&o.comparisons)?)?;
                files.push(name);
                discount.families.push(FamilyDiscount {
                    acqf_family: o.family.to_string(),
                    summary: o.delta.clone(),
                    mean_hf_fraction: o.mean_hf_fraction()?,
                    per_seed: o
                        .seeds
                        .iter()
                        .zip(&o.comparisons)
                        .map(|(&seed, c)| SeedDiscount {
                            seed,
                            report: c.report.clone(),
                        })
                        .collect(),
                });
                println!(
                    "{}: delta mean {:.4} (std {:.4}, n {}), MFBO HF fraction {:.3}",
                    o.family,
                    o.delta.mean,
                    o.delta.std,
                    o.delta.n,
                    o.mean_hf_fraction()?
                );
            }
            io::write_json(&out.join("discount.json"), &discount)?;
            files.push("discount.json".into());
        }
    }

    io::write_json(&out.join("summary.json"), &summary)?;
    files.push("summary.json".into());
    let notes = built.degrade.map(|d| serde_json::json!({ "degrade": d }));
    write_manifest(&out, "run", sha256, seeds, files, notes)?;
    for f in &summary.failures {
        eprintln!("mfbo: campaign failed: {f}");
    }
    if !summary.failures.is_empty() {
        return Err(CliError::Runtime(Error::Inconsistent(format!(
            "{} campaign(s) failed; successful runs were written to {}",
            summary.failures.len(),
            out.display()
        ))));
    }
    println!("wrote {} runs to {}", summary.runs.len(), out.display());
    Ok(())
}

fn write_manifest(
    out: &Path,
    command: &str,
    config_sha256: String,
    seeds: Vec<u64>,
    mut files: Vec<String>,
    notes: Option<serde_json::Value>,
) -> Result<(), CliError> {
    files.push("manifest.json".into());
    let m = Manifest {
        tool: "mfbo".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: format!("{command}: {}", command_line()),
        config_sha256,
        seeds,
        files,
        notes,
    };
    io::write_json(&out.join("manifest.json"), &m)?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let Loaded { config, sha256, seeds, out } = load(&args.common)?;
    let mut spec = config.sweep_spec()?;
    if let Some(rho) = args.rho {
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(CliError::Config(Error::config("--rho", format!("{r} must lie in (0, 1]"))));
        }
        spec.rho_values = rho;
    }
    let grid = with_workers(config.workers, || run_sweep(&spec))??;
    let rows: Vec<HeatmapRow> = grid.cells.iter().map(HeatmapRow::from).collect();
    io::write_heatmap(io::create_file(&out.join("heatmap.csv"))?, &rows)?;
    let mut trends = serde_json::Map::new();
    for &f in &spec.families {
        let (by_rho, by_r2) = grid.trend(f);
        println!("{f}: spearman(delta, rho) {by_rho:?}, spearman(delta, R2) {by_r2:?}");
        trends.insert(f.to_string(), serde_json::json!({ "spearman_rho": by_rho, "spearman_r2": by_r2 }));
    }
    let failed = grid.cells.iter().filter(|c| c.status != crate::experiments::CellStatus::Ok).count();
    let notes = serde_json::json!({ "r_squared": grid.r_squared, "trend": trends, "failed_cells": failed });
    write_manifest(&out, "sweep", sha256, seeds, vec!["heatmap.csv".into()], Some(notes))?;
    println!("wrote {} cells ({failed} failed) to {}", rows.len(), out.join("heatmap.csv").display());
    Ok(())
}

fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let ctx = path.display().to_string();
    let mut rdr = csv::Reader::from_reader(io::open_file(path)?);
    let headers: Vec<String> = rdr.headers().map_err(Error::from)?.iter().map(str::to_string).collect();
    let pos = |n: &str| headers.iter().position(|h| h.trim() == n);
    let (ih, il) = match (pos("hf"), pos("lf")) {
        (Some(h), Some(l)) => (h, l),
        _ if headers.len() >= 2 => (0, 1),
        _ => {
            return Err(CliError::Data(Error::MissingColumn {
                context: ctx,
                column: "hf/lf".into(),
            }))
        }
    };
    let (mut hf, mut lf) = (Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(Error::from)?;
        for (i, dst) in [(ih, &mut hf), (il, &mut lf)] {
            let s = rec.get(i).unwrap_or("").trim();
            let v: f64 = s.parse().map_err(|_| Error::Parse {
                context: ctx.clone(),
                row: k + 2,
                column: headers[i].clone(),
                message: format!("`{s}` is not a number"),
            })?;
            dst.push(v);
        }
    }
    if hf.is_empty() {
        return Err(CliError::Data(Error::Empty("pairs file has no rows")));
    }
    Ok((hf, lf))
}

fn cmd_advise(args: AdviseArgs) -> Result<(), CliError> {
    let r2 = match (args.r2, &args.pairs) {
        (Some(r2), _) => r2,
        (None, Some(p)) => {
            let (hf, lf) = read_pairs(p)?;
            r_squared_from_pairs(&hf, &lf).map_err(CliError::Data)?.clamped()
        }
        (None, None) => return Err(CliError::Config(Error::config("--r2", "give --r2 or --pairs"))),
    };
    let v = advise(args.rho, r2)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&v).map_err(Error::from)?);
    } else {
        println!("rho = {}, R2 = {:.4}", v.rho, v.r_squared);
        println!(
            "cheap enough (rho < {}): {}; informative enough (R2 > {}): {}",
            v.tau1, v.cheap_enough, v.tau2, v.informative_enough
        );
        println!("verdict: {}", v.verdict);
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let report = match (&args.config, &args.pairs) {
        (_, Some(p)) => {
            let (hf, lf) = read_pairs(p)?;
            r_squared_from_pairs(&hf, &lf).map_err(CliError::Data)?
        }
        (Some(c), None) => {
            let config = RunConfig::load(c).map_err(CliError::Config)?;
            let built = config.build_problem()?;
            estimate_informativeness(built.problem.as_ref(), args.samples, &mut RngStream::new(args.seed))?
        }
        (None, None) => return Err(CliError::Config(Error::config("--config", "give --config or --pairs"))),
    };
    println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
    Ok(())
}
