use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{r_squared_from_pairs, Problem};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::space::{Candidate, DesignPoint, Fidelity, FidelityModel, SearchSpace};

/// Column layout of a candidate table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularOptions {
    /// Feature columns; empty means every column other than the value and id columns.
    pub feature_columns: Vec<String>,
    pub hf_column: String,
    pub lf_column: String,
    /// Identifier column. When `None`, a column named `id` is used if present,
    /// otherwise the data row number.
    pub id_column: Option<String>,
}

impl Default for TabularOptions {
    fn default() -> Self {
        TabularOptions {
            feature_columns: Vec::new(),
            hf_column: "hf".into(),
            lf_column: "lf".into(),
            id_column: None,
        }
    }
}

/// A finite candidate set with stored HF and LF values.
#[derive(Clone, Debug)]
pub struct TabularProblem {
    name: String,
    space: SearchSpace,
    hf_values: Vec<f64>,
    lf_values: Vec<f64>,
    fidelity_model: FidelityModel,
    optimum: f64,
}

impl TabularProblem {
    /// Builds a problem from already-normalized candidates.
    pub fn new(name: impl Into<String>, candidates: Vec<Candidate>, hf_values: Vec<f64>, lf_values: Vec<f64>, rho: f64) -> Result<Self> {
        let n = candidates.len();
        if hf_values.len() != n || lf_values.len() != n {
            return Err(Error::Inconsistent(format!(
                "{n} candidates but {} HF and {} LF values",
                hf_values.len(),
                lf_values.len()
            )));
        }
        let optimum = hf_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(TabularProblem {
            name: name.into(),
            space: SearchSpace::discrete(candidates)?,
            hf_values,
            lf_values,
            fidelity_model: FidelityModel::new(rho)?,
            optimum,
        })
    }

    pub fn hf_values(&self) -> &[f64] {
        &self.hf_values
    }

    pub fn lf_values(&self) -> &[f64] {
        &self.lf_values
    }

    pub fn len(&self) -> usize {
        self.hf_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hf_values.is_empty()
    }

    /// Index of the best HF candidate (first on ties).
    pub fn argmax(&self) -> usize {
        self.hf_values
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > self.hf_values[best] { i } else { best })
    }

    /// Same table with a replacement LF column.
    pub fn with_lf(&self, lf_values: Vec<f64>) -> Result<Self> {
        let SearchSpace::Discrete(s) = &self.space else { unreachable!() };
        TabularProblem::new(self.name.clone(), s.candidates().to_vec(), self.hf_values.clone(), lf_values, self.fidelity_model.rho())
    }
}

impl Problem for TabularProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn fidelity_model(&self) -> &FidelityModel {
        &self.fidelity_model
    }

    fn evaluate(&self, x: &DesignPoint, fidelity: Fidelity) -> Result<f64> {
        let DesignPoint::Candidate(i) = *x else {
            return Err(Error::Mode("tabular problems take candidate indices".into()));
        };
        let values = match fidelity {
            Fidelity::High => &self.hf_values,
            Fidelity::Low => &self.lf_values,
        };
        values.get(i).copied().ok_or(Error::UnknownCandidate {
            index: i,
            count: values.len(),
        })
    }

    fn optimum(&self) -> f64 {
        self.optimum
    }
}

/// Per-column min-max scaling into `[0, 1]`; constant columns map to 0.
pub(crate) fn min_max_columns(rows: &mut [Vec<f64>]) {
    let Some(dim) = rows.first().map(Vec::len) else { return };
    for j in 0..dim {
        let (lo, hi) = rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[j]), hi.max(r[j])));
        let span = hi - lo;
        for r in rows.iter_mut() {
            r[j] = if span > 0.0 { ((r[j] - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
        }
    }
}

pub fn load_tabular(path: impl AsRef<Path>, opts: &TabularOptions, rho: f64) -> Result<TabularProblem> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "table".into());
    parse_tabular(file, &name, opts, rho)
}

/// Parses a candidate table from CSV text. `name` labels the problem and
/// every error message. Row numbers in errors are file line numbers.
pub fn parse_tabular(reader: impl Read, name: &str, opts: &TabularOptions, rho: f64) -> Result<TabularProblem> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let find = |col: &str| -> Result<usize> {
        headers.iter().position(|h| h == col).ok_or_else(|| Error::MissingColumn {
            context: name.to_string(),
            column: col.to_string(),
        })
    };
    let hf_idx = find(&opts.hf_column)?;
    let lf_idx = find(&opts.lf_column)?;
    let id_idx = match &opts.id_column {
        Some(c) => Some(find(c)?),
        None => headers.iter().position(|h| h == "id"),
    };
    let feature_idx: Vec<usize> = if opts.feature_columns.is_empty() {
        (0..headers.len())
            .filter(|&i| i != hf_idx && i != lf_idx && Some(i) != id_idx)
            .collect()
    } else {
        opts.feature_columns.iter().map(|c| find(c)).collect::<Result<_>>()?
    };
    if feature_idx.is_empty() {
        return Err(Error::config("feature_columns", format!("{name}: no feature columns")));
    }

    let mut ids = Vec::new();
    let mut features = Vec::new();
    let mut hf = Vec::new();
    let mut lf = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (k, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record.position().map_or(k + 2, |p| p.line() as usize);
        let cell = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("").trim();
            let parse_err = |message: String| Error::Parse {
                context: name.to_string(),
                row,
                column: headers[i].clone(),
                message,
            };
            if raw.is_empty() {
                return Err(parse_err("missing value".into()));
            }
            let v: f64 = raw.parse().map_err(|_| parse_err(format!("`{raw}` is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("`{raw}` is not finite")));
            }
            Ok(v)
        };
        let id = match id_idx {
            Some(i) => record.get(i).unwrap_or("").trim().to_string(),
            None => (k + 1).to_string(),
        };
        if id.is_empty() {
            return Err(Error::Parse {
                context: name.to_string(),
                row,
                column: headers[id_idx.unwrap_or(0)].clone(),
                message: "missing identifier".into(),
            });
        }
        if seen.insert(id.clone(), row).is_some() {
            return Err(Error::DuplicateId {
                context: name.to_string(),
                row,
                id,
            });
        }
        features.push(feature_idx.iter().map(|&i| cell(i)).collect::<Result<Vec<f64>>>()?);
        hf.push(cell(hf_idx)?);
        lf.push(cell(lf_idx)?);
        ids.push(id);
    }
    if hf.is_empty() {
        return Err(Error::Empty("candidate table has no rows"));
    }
    min_max_columns(&mut features);
    let candidates = ids
        .into_iter()
        .zip(features)
        .map(|(id, features)| Candidate { id, features })
        .collect();
    TabularProblem::new(name, candidates, hf, lf, rho)
}

/// Outcome of [`degrade_lf`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradeReport {
    pub method: String,
    pub target_r2: f64,
    pub achieved_r2: f64,
    pub noise_std: f64,
    pub seed: u64,
}

/// Adds seeded Gaussian noise to the LF column, growing its scale
/// geometrically until the table-wide R² drops below `target_r2`.
pub fn degrade_lf(problem: &TabularProblem, target_r2: f64, rng: &mut RngStream) -> Result<(TabularProblem, DegradeReport)> {
    if !(target_r2 > 0.0 && target_r2 < 1.0) {
        return Err(Error::config("degrade_to_r2", format!("{target_r2} must lie in (0, 1)")));
    }
    let lf = problem.lf_values();
    let base = r_squared_from_pairs(problem.hf_values(), lf)?;
    let seed = rng.seed();
    let report = |noise_std: f64, achieved_r2: f64| DegradeReport {
        method: "additive seeded Gaussian noise on LF, scale grown by 1.25x until R2 < target".into(),
        target_r2,
        achieved_r2,
        noise_std,
        seed,
    };
    if base.r_squared < target_r2 {
        let r = report(0.0, base.r_squared);
        return Ok((problem.clone(), r));
    }
    let spread = crate::stats::std_dev(lf).max(f64::MIN_POSITIVE);
    let noise: Vec<f64> = (0..lf.len()).map(|_| rng.normal()).collect();
    let mut scale = 0.01 * spread;
    for _ in 0..400 {
        let noisy: Vec<f64> = lf.iter().zip(&noise).map(|(v, z)| v + scale * z).collect();
        let r2 = r_squared_from_pairs(problem.hf_values(), &noisy)?.r_squared;
        if r2 < target_r2 {
            let r = report(scale, r2);
            return Ok((problem.with_lf(noisy)?, r));
        }
        scale *= 1.25;
    }
    Err(Error::Inconsistent(format!("could not degrade LF below R2 {target_r2}")))
}
