//! Readers and writers for every emitted artifact.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! reading a file back reproduces the written values bit for bit.
//!
//! Trace CSV columns: `step, fidelity, cost, cumulative_cost, y, best_hf,
//! phase`, then `candidate` for tabular problems, then `x0 .. x{d-1}`.
//! `fidelity` is the kernel coordinate (1 = high, 0 = low), `best_hf` is
//! empty until the first high-fidelity observation, and `phase` is `init`
//! or `seq`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{CellStatus, SweepCell};
use crate::metrics::{DiscountReport, RegretCurveRow, Summary};
use crate::space::{CampaignTrace, DesignPoint, Fidelity, Observation};

fn parse_err(context: &str, row: usize, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        context: context.to_string(),
        row,
        column: column.to_string(),
        message: message.into(),
    }
}

pub fn write_trace(mut w: impl Write, trace: &CampaignTrace) -> Result<()> {
    let obs = trace.observations();
    let discrete = matches!(obs.first().map(|o| &o.x), Some(DesignPoint::Candidate(_)));
    let dim = match obs.first().map(|o| &o.x) {
        Some(DesignPoint::Continuous(v)) => v.len(),
        _ => 0,
    };
    let mut header = String::from("step,fidelity,cost,cumulative_cost,y,best_hf,phase");
    if discrete {
        header.push_str(",candidate");
    }
    for d in 0..dim {
        header.push_str(&format!(",x{d}"));
    }
    let io = |e| Error::io("<trace>", e);
    writeln!(w, "{header}").map_err(io)?;
    let mut best: Option<f64> = None;
    for (i, (o, c)) in obs.iter().zip(trace.cumulative_costs()).enumerate() {
        if o.fidelity == Fidelity::High {
            best = Some(best.map_or(o.y, |b| b.max(o.y)));
        }
        let mut line = format!(
            "{},{},{},{},{},{},{}",
            i + 1,
            o.fidelity.value(),
            o.cost,
            c,
            o.y,
            best.map(|b| b.to_string()).unwrap_or_default(),
            if i < trace.initial_count() { "init" } else { "seq" }
        );
        match &o.x {
            DesignPoint::Candidate(k) => line.push_str(&format!(",{k}")),
            DesignPoint::Continuous(v) => {
                for x in v {
                    line.push_str(&format!(",{x}"));
                }
            }
        }
        writeln!(w, "{line}").map_err(io)?;
    }
    Ok(())
}

/// Reads a trace written by [`write_trace`]. Cumulative costs are
/// recomputed and checked against the stored column.
pub fn read_trace(r: impl Read, seed: u64) -> Result<CampaignTrace> {
    const CTX: &str = "trace";
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn {
            context: CTX.into(),
            column: name.into(),
        })
    };
    let (c_fid, c_cost, c_cum, c_y, c_phase) = (col("fidelity")?, col("cost")?, col("cumulative_cost")?, col("y")?, col("phase")?);
    let c_cand = headers.iter().position(|h| h == "candidate");
    let x_cols: Vec<usize> = (0..).map_while(|d| headers.iter().position(|h| *h == format!("x{d}"))).collect();

    let mut observations = Vec::new();
    let mut stored_cum = Vec::new();
    let mut initial_count = 0;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        let num = |i: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse().map_err(|_| parse_err(CTX, row, &headers[i], format!("`{s}` is not a number")))
        };
        let fidelity = Fidelity::from_value(num(c_fid)?).map_err(|e| parse_err(CTX, row, "fidelity", e.to_string()))?;
        let x = match c_cand {
            Some(i) => {
                let s = rec.get(i).unwrap_or("");
                DesignPoint::Candidate(s.parse().map_err(|_| parse_err(CTX, row, "candidate", format!("`{s}` is not an index")))?)
            }
            None => DesignPoint::Continuous(x_cols.iter().map(|&i| num(i)).collect::<Result<_>>()?),
        };
        match rec.get(c_phase) {
            Some("init") => {
                if initial_count != k {
                    return Err(parse_err(CTX, row, "phase", "initial design rows must come first"));
                }
                initial_count += 1;
            }
            Some("seq") => {}
            other => return Err(parse_err(CTX, row, "phase", format!("unknown phase {other:?}"))),
        }
        stored_cum.push(num(c_cum)?);
        observations.push(Observation {
            x,
            fidelity,
            y: num(c_y)?,
            cost: num(c_cost)?,
        });
    }
    let trace = CampaignTrace::from_observations(seed, observations, initial_count)?;
    if trace.cumulative_costs() != stored_cum.as_slice() {
        return Err(Error::Inconsistent("trace cumulative_cost column disagrees with its cost column".into()));
    }
    Ok(trace)
}

pub fn write_regret_curve(w: impl Write, rows: &[RegretCurveRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::io("<regret>", e))?;
    Ok(())
}

pub fn read_regret_curve(r: impl Read) -> Result<Vec<RegretCurveRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

/// One row of the long-format heatmap CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub rho: f64,
    pub alpha: f64,
    pub r_squared: f64,
    pub acqf_family: String,
    pub delta_mean: f64,
    pub delta_std: f64,
    pub n_seeds: usize,
    pub status: String,
}

impl From<&SweepCell> for HeatmapRow {
    fn from(c: &SweepCell) -> Self {
        HeatmapRow {
            rho: c.rho,
            alpha: c.alpha,
            r_squared: c.r_squared,
            acqf_family: c.family.to_string(),
            delta_mean: c.delta_mean(),
            delta_std: c.delta_std(),
            n_seeds: c.deltas.len(),
            status: match &c.status {
                CellStatus::Ok => "ok".into(),
                CellStatus::Failed(m) => format!("failed: {m}"),
            },
        }
    }
}

pub fn write_heatmap(w: impl Write, rows: &[HeatmapRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush().map_err(|e| Error::io("<heatmap>", e))?;
    Ok(())
}

pub fn read_heatmap(r: impl Read) -> Result<Vec<HeatmapRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedDiscount {
    pub seed: u64,
    #[serde(flatten)]
    pub report: DiscountReport,
}

/// Content of `discount.json`: per-family Δ reports and summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscountFile {
    pub problem: String,
    pub tau: f64,
    pub families: Vec<FamilyDiscount>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDiscount {
    pub acqf_family: String,
    pub summary: Summary,
    pub mean_hf_fraction: f64,
    pub per_seed: Vec<SeedDiscount>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<serde_json::Value>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn create_file(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn open_file(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}
