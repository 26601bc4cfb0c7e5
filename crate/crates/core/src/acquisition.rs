//! Acquisition functions and their maximization.
//!
//! Single-fidelity scores are classic expected improvement and max-value
//! entropy search. In multi-fidelity mode every `(x, l)` pair is scored as
//! `raw(x, l) / cost(l)`, where the raw value at the high fidelity is the
//! single-fidelity score and the raw value at the low fidelity discounts it
//! by how much a low-fidelity observation at `x` can tell about the
//! high-fidelity objective under the joint posterior:
//!
//! * EI: `EI(x) · corr(f_low(x), f_high(x))`.
//! * MES: mutual information between `f_low(x)` and the global maximum,
//!   integrated numerically; it reduces to MES when the correlation is 1
//!   and to 0 when it is 0.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{nelder_mead_box, NelderMeadOptions};
use crate::rng::RngStream;
use crate::space::{latin_hypercube_unit, DesignPoint, Fidelity, FidelityModel, Observation, SearchSpace};
use crate::stats::{gl16, inverse_mills, log_norm_cdf, norm_cdf, norm_pdf, LN_SQRT_2PI};
use crate::surrogate::{PairPrediction, SurrogateState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcquisitionFamily {
    Ei,
    Mes,
}

impl AcquisitionFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            AcquisitionFamily::Ei => "ei",
            AcquisitionFamily::Mes => "mes",
        }
    }
}

impl std::fmt::Display for AcquisitionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AcquisitionFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ei" => Ok(AcquisitionFamily::Ei),
            "mes" => Ok(AcquisitionFamily::Mes),
            other => Err(Error::config("acquisition", format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMode {
    SingleFidelity,
    MultiFidelity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionSpec {
    pub family: AcquisitionFamily,
    pub mode: FidelityMode,
    pub mes_max_samples: usize,
    pub candidate_grid_size: usize,
    /// Discretization used to fit the Gumbel approximation of `f*`.
    pub mes_grid_size: usize,
    /// Number of best grid points refined by Nelder-Mead.
    pub refine_starts: usize,
}

impl AcquisitionSpec {
    pub fn new(family: AcquisitionFamily, mode: FidelityMode) -> Self {
        AcquisitionSpec {
            family,
            mode,
            mes_max_samples: 16,
            candidate_grid_size: 2048,
            mes_grid_size: 1000,
            refine_starts: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mes_max_samples == 0 {
            return Err(Error::config("mes_max_samples", "must be at least 1"));
        }
        if self.candidate_grid_size == 0 {
            return Err(Error::config("candidate_grid_size", "must be at least 1"));
        }
        if self.mes_grid_size == 0 {
            return Err(Error::config("mes_grid_size", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryDecision {
    pub x: DesignPoint,
    pub fidelity: Fidelity,
    pub acquisition_value: f64,
    pub raw_value: f64,
}

/// Closed-form expected improvement over `incumbent` (maximization).
pub fn expected_improvement(mean: f64, std: f64, incumbent: f64) -> f64 {
    let diff = mean - incumbent;
    if !(std > 0.0) {
        return diff.max(0.0);
    }
    let z = diff / std;
    (diff * norm_cdf(z) + std * norm_pdf(z)).max(0.0)
}

/// Max-value entropy search: average over sampled maxima `f*` of
/// `γ φ(γ) / (2 Φ(γ)) − ln Φ(γ)` with `γ = (f* − mean) / std`.
pub fn mes_value(mean: f64, std: f64, max_samples: &[f64]) -> f64 {
    if !(std > 0.0) || max_samples.is_empty() {
        return 0.0;
    }
    let total: f64 = max_samples
        .iter()
        .map(|&f| {
            let g = (f - mean) / std;
            0.5 * g * inverse_mills(g) - log_norm_cdf(g)
        })
        .sum();
    (total / max_samples.len() as f64).max(0.0)
}

/// Information about the high-fidelity maximum gained by observing a value
/// whose posterior correlation with `f_high(x)` is `correlation`.
///
/// `mean`/`std` are the high-fidelity posterior at `x`.
pub fn mf_mes_value(mean: f64, std: f64, correlation: f64, max_samples: &[f64]) -> f64 {
    if !(std > 0.0) || max_samples.is_empty() {
        return 0.0;
    }
    let r = correlation.abs().min(1.0);
    if r >= 1.0 - 1e-10 {
        return mes_value(mean, std, max_samples);
    }
    if r <= 1e-10 {
        return 0.0;
    }
    let w = (1.0 - r * r).sqrt();
    let (nodes, weights) = gl16();
    let total: f64 = max_samples
        .iter()
        .map(|&f| {
            let gamma = (f - mean) / std;
            let log_cdf_gamma = log_norm_cdf(gamma);
            let mills = inverse_mills(gamma);
            // E_q[ln Φ(g(z))], q(z) ∝ φ(z) Φ(g(z)), g(z) = (γ − r z)/√(1−r²)
            let centre = -r * mills;
            let lo = (-8.0f64).min(centre - 8.0);
            let hi = 8.0;
            let z0 = gamma / r;
            let band = 6.0 * w / r;
            let mut cuts = vec![lo, hi];
            for c in [z0 - band, z0, z0 + band] {
                if c > lo && c < hi {
                    cuts.push(c);
                }
            }
            cuts.sort_by(f64::total_cmp);
            let mut expectation = 0.0;
            for seg in cuts.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                let half = 0.5 * (b - a);
                let mid = 0.5 * (a + b);
                for (t, wt) in nodes.iter().zip(weights) {
                    let z = mid + half * t;
                    let lg = log_norm_cdf((gamma - r * z) / w);
                    let density = (-0.5 * z * z - LN_SQRT_2PI + lg - log_cdf_gamma).exp();
                    expectation += half * wt * density * lg;
                }
            }
            0.5 * r * r * gamma * mills + expectation - log_cdf_gamma
        })
        .sum();
    (total / max_samples.len() as f64).max(0.0)
}

/// Expected improvement at the high fidelity scaled by the posterior
/// correlation of the queried fidelity with it.
pub fn mf_ei_value(mean: f64, std: f64, incumbent: f64, correlation: f64) -> f64 {
    expected_improvement(mean, std, incumbent) * correlation.clamp(0.0, 1.0)
}

/// Draws `n_samples` maxima from a Gumbel fit to
/// `P(f* ≤ y) ≈ Π_i Φ((y − μ_i)/σ_i)` over a grid of high-fidelity
/// posterior marginals. Samples are clamped to at least `best_hf`.
pub fn sample_max_values(
    state: &SurrogateState,
    space: &SearchSpace,
    n_samples: usize,
    best_hf: f64,
    grid_size: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let grid = max_value_grid(state, space, grid_size, rng)?;
    let preds = state.predict_pairs(&grid)?;
    let marginals: Vec<(f64, f64)> = preds.iter().map(|p| (p.high.mean, p.high.std())).collect();
    Ok(gumbel_samples(&marginals, n_samples, best_hf, rng))
}

fn max_value_grid(state: &SurrogateState, space: &SearchSpace, grid_size: usize, rng: &mut RngStream) -> Result<Vec<Vec<f64>>> {
    let data = state.data();
    let hf_inputs = data
        .inputs()
        .iter()
        .zip(data.fidelities())
        .filter(|(_, &l)| l == 1.0)
        .map(|(x, _)| x.clone());
    Ok(match space {
        SearchSpace::Continuous(_) => {
            let dim = space.dim();
            let mut grid: Vec<Vec<f64>> = (0..grid_size)
                .map(|_| (0..dim).map(|_| rng.uniform()).collect())
                .collect();
            grid.extend(hf_inputs);
            grid
        }
        SearchSpace::Discrete(s) => {
            if s.len() <= grid_size {
                s.candidates().iter().map(|c| c.features.clone()).collect()
            } else {
                crate::space::uniform_sample(space, grid_size, rng)?
                    .into_iter()
                    .map(|p| space.features(&p))
                    .collect::<Result<Vec<_>>>()?
            }
        }
    })
}

pub(crate) fn gumbel_samples(marginals: &[(f64, f64)], n: usize, best: f64, rng: &mut RngStream) -> Vec<f64> {
    let max_std = marginals.iter().map(|m| m.1).fold(0.0, f64::max);
    if !(max_std > 0.0) {
        return vec![best; n];
    }
    let log_cdf = |y: f64| -> f64 {
        marginals
            .iter()
            .map(|&(m, s)| {
                if s > 0.0 {
                    log_norm_cdf((y - m) / s)
                } else if y >= m {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            })
            .sum()
    };
    let max_mean = marginals.iter().map(|m| m.0).fold(f64::NEG_INFINITY, f64::max);
    let upper = marginals.iter().map(|&(m, s)| m + 6.0 * s).fold(f64::NEG_INFINITY, f64::max);
    let mut lower = max_mean.min(best) - 6.0 * max_std;
    while log_cdf(lower) > 0.25f64.ln() {
        lower -= 6.0 * max_std;
    }
    let quantile = |q: f64| -> f64 {
        let target = q.ln();
        let (mut a, mut b) = (lower, upper);
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if log_cdf(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-12 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (a + b)
    };
    let (y1, y2, y3) = (quantile(0.25), quantile(0.5), quantile(0.75));
    // Gumbel quantile: y_q = a − b ln(−ln q)
    let scale = (y3 - y1) / ((-(0.25f64.ln())).ln() - (-(0.75f64.ln())).ln());
    let loc = y2 + scale * (-(0.5f64.ln())).ln();
    (0..n)
        .map(|_| {
            let u = rng.uniform().clamp(1e-12, 1.0 - 1e-12);
            (loc - scale * (-u.ln()).ln()).max(best)
        })
        .collect()
}

/// A raw score for one `(candidate, fidelity)` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoredPair {
    pub candidate: usize,
    pub fidelity: Fidelity,
    pub raw: f64,
}

/// Index of the pair maximizing `raw / cost(fidelity)`. Ties go to the
/// lowest candidate index, then the lowest fidelity.
pub fn select_best(scored: &[ScoredPair], cost: impl Fn(Fidelity) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scored.iter().enumerate() {
        let v = s.raw / cost(s.fidelity);
        if v.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some((j, bv)) => {
                let b = &scored[j];
                v > bv || (v == bv && (s.candidate, s.fidelity) < (b.candidate, b.fidelity))
            }
        };
        if better {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

struct Scorer<'a> {
    family: AcquisitionFamily,
    incumbent: f64,
    samples: &'a [f64],
}

impl Scorer<'_> {
    fn raw(&self, pair: &PairPrediction, fidelity: Fidelity) -> f64 {
        let (m, s) = (pair.high.mean, pair.high.std());
        match (self.family, fidelity) {
            (AcquisitionFamily::Ei, Fidelity::High) => expected_improvement(m, s, self.incumbent),
            (AcquisitionFamily::Mes, Fidelity::High) => mes_value(m, s, self.samples),
            (AcquisitionFamily::Ei, Fidelity::Low) => mf_ei_value(m, s, self.incumbent, pair.correlation()),
            (AcquisitionFamily::Mes, Fidelity::Low) => mf_mes_value(m, s, pair.correlation(), self.samples),
        }
    }
}

fn incumbent(state: &SurrogateState, observations: &[Observation]) -> Result<f64> {
    if let Some(best) = observations
        .iter()
        .filter(|o| o.fidelity == Fidelity::High)
        .map(|o| o.y)
        .reduce(f64::max)
    {
        return Ok(best);
    }
    // No high-fidelity data yet: fall back to the best predicted HF mean at observed inputs.
    let preds = state.predict_pairs(state.data().inputs())?;
    preds
        .iter()
        .map(|p| p.high.mean)
        .reduce(f64::max)
        .ok_or(Error::InsufficientData { needed: 1, found: 0 })
}

/// Chooses the next `(x, l)` to evaluate.
///
/// `allowed` restricts the fidelities that may be proposed (for example to
/// those still affordable); single-fidelity mode only ever proposes the high
/// fidelity.
pub fn next_query(
    state: &SurrogateState,
    space: &SearchSpace,
    fidelity_model: &FidelityModel,
    spec: &AcquisitionSpec,
    observations: &[Observation],
    allowed: &[Fidelity],
    rng: &mut RngStream,
) -> Result<QueryDecision> {
    spec.validate()?;
    let mut fidelities: Vec<Fidelity> = allowed
        .iter()
        .copied()
        .filter(|f| spec.mode == FidelityMode::MultiFidelity || *f == Fidelity::High)
        .collect();
    fidelities.sort();
    fidelities.dedup();
    if fidelities.is_empty() {
        return Err(Error::config("allowed", "no admissible fidelity for this acquisition mode"));
    }
    let cost = |f: Fidelity| match spec.mode {
        FidelityMode::MultiFidelity => fidelity_model.cost(f),
        FidelityMode::SingleFidelity => 1.0,
    };

    let best = incumbent(state, observations)?;
    let samples = match spec.family {
        AcquisitionFamily::Mes => {
            sample_max_values(state, space, spec.mes_max_samples, best, spec.mes_grid_size, rng)?
        }
        AcquisitionFamily::Ei => Vec::new(),
    };
    let scorer = Scorer {
        family: spec.family,
        incumbent: best,
        samples: &samples,
    };

    let decision = |x: DesignPoint, s: &ScoredPair| QueryDecision {
        x,
        fidelity: s.fidelity,
        acquisition_value: s.raw / cost(s.fidelity),
        raw_value: s.raw,
    };

    match space {
        SearchSpace::Discrete(table) => {
            let queried: HashSet<(usize, Fidelity)> = observations
                .iter()
                .filter_map(|o| match o.x {
                    DesignPoint::Candidate(i) => Some((i, o.fidelity)),
                    _ => None,
                })
                .collect();
            let open: Vec<usize> = (0..table.len())
                .filter(|i| fidelities.iter().any(|f| !queried.contains(&(*i, *f))))
                .collect();
            if open.is_empty() {
                return Err(Error::Exhausted);
            }
            let feats: Vec<Vec<f64>> = open.iter().map(|&i| table.candidates()[i].features.clone()).collect();
            let preds = state.predict_pairs(&feats)?;
            let mut scored = Vec::with_capacity(open.len() * fidelities.len());
            for (&i, pair) in open.iter().zip(&preds) {
                for &f in &fidelities {
                    if !queried.contains(&(i, f)) {
                        scored.push(ScoredPair {
                            candidate: i,
                            fidelity: f,
                            raw: scorer.raw(pair, f),
                        });
                    }
                }
            }
            let k = select_best(&scored, cost).ok_or(Error::Exhausted)?;
            Ok(decision(DesignPoint::Candidate(scored[k].candidate), &scored[k]))
        }
        SearchSpace::Continuous(cs) => {
            let dim = space.dim();
            let mut points = latin_hypercube_unit(dim, spec.candidate_grid_size, rng);
            let preds = state.predict_pairs(&points)?;
            let mut scored = Vec::with_capacity(points.len() * fidelities.len());
            for (i, pair) in preds.iter().enumerate() {
                for &f in &fidelities {
                    scored.push(ScoredPair {
                        candidate: i,
                        fidelity: f,
                        raw: scorer.raw(pair, f),
                    });
                }
            }

            // Local refinement from the best grid pairs.
            let mut order: Vec<usize> = (0..scored.len()).collect();
            order.sort_by(|&a, &b| {
                let va = scored[a].raw / cost(scored[a].fidelity);
                let vb = scored[b].raw / cost(scored[b].fidelity);
                vb.total_cmp(&va).then(a.cmp(&b))
            });
            let lo = vec![0.0; dim];
            let hi = vec![1.0; dim];
            let nm = NelderMeadOptions {
                max_evals: 40 * (dim + 1),
                initial_step: 0.02,
                f_tol: 1e-10,
            };
            let mut refined = Vec::new();
            for &k in order.iter().take(spec.refine_starts) {
                let start = scored[k];
                let c = cost(start.fidelity);
                let objective = |u: &[f64]| -> f64 {
                    match state.predict_pairs(&[u.to_vec()]) {
                        Ok(p) => -scorer.raw(&p[0], start.fidelity) / c,
                        Err(_) => f64::INFINITY,
                    }
                };
                let m = nelder_mead_box(objective, &points[start.candidate], &lo, &hi, &nm);
                refined.push((m.x, start.fidelity, -m.value * c));
            }
            for (u, f, raw) in refined {
                scored.push(ScoredPair {
                    candidate: points.len(),
                    fidelity: f,
                    raw,
                });
                points.push(u);
            }

            let k = select_best(&scored, cost).ok_or_else(|| Error::Inconsistent("no finite acquisition value".into()))?;
            let x = cs.from_unit(&points[scored[k].candidate]);
            // Guard against rounding just outside the box.
            let x = x
                .iter()
                .zip(cs.bounds())
                .map(|(v, (l, h))| v.clamp(*l, *h))
                .collect();
            Ok(decision(DesignPoint::Continuous(x), &scored[k]))
        }
    }
}
