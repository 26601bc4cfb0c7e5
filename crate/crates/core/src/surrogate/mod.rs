//! Multi-fidelity Gaussian-process surrogate.
//!
//! Training outputs are standardized per fit (all fidelities pooled) so the
//! zero-mean prior is sensible; predictions come back in original units.
//! Hyperparameters are fitted by maximizing the log marginal likelihood with
//! a multi-start projected L-BFGS in log-space using analytic gradients.

pub mod kernel;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{lbfgs_box, LbfgsOptions};
use crate::rng::RngStream;
use crate::stats::LN_SQRT_2PI;
pub use kernel::{kernel_fidelity, kernel_full, kernel_input, KernelParams};
use kernel::{fidelity_factor, input_unchecked, DELTA_OFFSET};

/// Largest jitter multiplier tried before giving up on a factorization.
pub const JITTER_CAP: f64 = 1e-2;
/// Default lower bound on the fitted noise variance (standardized outputs).
pub const NOISE_FLOOR: f64 = 1e-4;
const JITTER_START: f64 = 1e-8;

/// Training inputs as surrogate features (unit-scaled), fidelity
/// coordinates and raw outputs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingData {
    inputs: Vec<Vec<f64>>,
    fidelities: Vec<f64>,
    outputs: Vec<f64>,
}

impl TrainingData {
    pub fn new(inputs: Vec<Vec<f64>>, fidelities: Vec<f64>, outputs: Vec<f64>) -> Result<Self> {
        if inputs.len() != fidelities.len() || inputs.len() != outputs.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                found: if fidelities.len() != inputs.len() { fidelities.len() } else { outputs.len() },
            });
        }
        if let Some(first) = inputs.first() {
            let d = first.len();
            if let Some(bad) = inputs.iter().find(|x| x.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: bad.len(),
                });
            }
        }
        if let Some(&l) = fidelities.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(Error::config("fidelity", format!("{l} outside [0, 1]")));
        }
        Ok(TrainingData {
            inputs,
            fidelities,
            outputs,
        })
    }

    pub fn empty() -> Self {
        TrainingData::default()
    }

    pub fn push(&mut self, x: Vec<f64>, l: f64, y: f64) -> Result<()> {
        if let Some(first) = self.inputs.first() {
            if first.len() != x.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    found: x.len(),
                });
            }
        }
        self.inputs.push(x);
        self.fidelities.push(l);
        self.outputs.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.inputs.first().map(Vec::len)
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn fidelities(&self) -> &[f64] {
        &self.fidelities
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scaling {
    Standardize,
    Identity,
}

/// Affine map between original outputs and the GP's working scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputScaling {
    pub shift: f64,
    pub scale: f64,
}

impl OutputScaling {
    pub fn identity() -> Self {
        OutputScaling { shift: 0.0, scale: 1.0 }
    }

    pub fn fit(y: &[f64], mode: Scaling) -> Self {
        if mode == Scaling::Identity || y.is_empty() {
            return Self::identity();
        }
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        let scale = if var > 0.0 && var.is_finite() { var.sqrt() } else { 1.0 };
        OutputScaling { shift: mean, scale }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Joint posterior of the latent function at `(x, 1)` and `(x, 0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairPrediction {
    pub high: Prediction,
    pub low: Prediction,
    pub covariance: f64,
}

impl PairPrediction {
    /// Posterior correlation between the low- and high-fidelity values.
    pub fn correlation(&self) -> f64 {
        let denom = (self.high.variance * self.low.variance).sqrt();
        if denom > 0.0 {
            (self.covariance / denom).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    }
}

/// A conditioned GP: data, hyperparameters and cached factorization.
#[derive(Clone, Debug)]
pub struct SurrogateState {
    data: TrainingData,
    scaling: OutputScaling,
    params: KernelParams,
    chol: Option<Cholesky<f64, Dyn>>,
    /// Row-major copy of the lower factor for cache-friendly solves.
    lower_rows: Vec<f64>,
    alpha: DVector<f64>,
    y_work: DVector<f64>,
    jitter: f64,
    lml: f64,
}

fn gram(data: &TrainingData, p: &KernelParams) -> DMatrix<f64> {
    let n = data.len();
    let a: Vec<f64> = data
        .fidelities
        .iter()
        .map(|&l| fidelity_factor(l, p.fidelity_exponent))
        .collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = p.signal_variance
                * input_unchecked(&data.inputs[i], &data.inputs[j], &p.length_scales)
                * (p.fidelity_offset + a[i] * a[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Cholesky of `K + (σ_ε² + jitter) I`, escalating jitter from
/// `1e-8·mean(diag K)` by factors of ten up to `1e-2·mean(diag K)`.
fn factorize(k: &DMatrix<f64>, noise: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    let mean_diag = (0..n).map(|i| k[(i, i)]).sum::<f64>() / n.max(1) as f64;
    let mut rel = 0.0;
    loop {
        let jitter = rel * mean_diag;
        let mut m = k.clone();
        for i in 0..n {
            m[(i, i)] += noise + jitter;
        }
        if let Some(ch) = Cholesky::new(m) {
            return Ok((ch, jitter));
        }
        rel = if rel == 0.0 { JITTER_START } else { rel * 10.0 };
        if rel > JITTER_CAP * (1.0 + 1e-12) {
            return Err(Error::NotPositiveDefinite {
                jitter: JITTER_CAP * mean_diag,
            });
        }
    }
}

impl SurrogateState {
    /// Conditions the GP on `data` at fixed hyperparameters.
    pub fn condition(data: TrainingData, params: KernelParams, scaling: Scaling) -> Result<Self> {
        params.validate()?;
        if let Some(d) = data.dim() {
            if d != params.dim() {
                return Err(Error::DimensionMismatch {
                    expected: params.dim(),
                    found: d,
                });
            }
        }
        let scaling = OutputScaling::fit(&data.outputs, scaling);
        let y_work = DVector::from_iterator(
            data.len(),
            data.outputs.iter().map(|y| (y - scaling.shift) / scaling.scale),
        );
        let n = data.len();
        if n == 0 {
            return Ok(SurrogateState {
                data,
                scaling,
                params,
                chol: None,
                lower_rows: Vec::new(),
                alpha: DVector::zeros(0),
                y_work,
                jitter: 0.0,
                lml: 0.0,
            });
        }
        let k = gram(&data, &params);
        let (chol, jitter) = factorize(&k, params.noise_variance)?;
        let alpha = chol.solve(&y_work);
        let l = chol.l_dirty();
        let mut lower_rows = vec![0.0; n * n];
        let mut log_det_half = 0.0;
        for i in 0..n {
            for j in 0..=i {
                lower_rows[i * n + j] = l[(i, j)];
            }
            log_det_half += l[(i, i)].ln();
        }
        let lml = -0.5 * y_work.dot(&alpha) - log_det_half - n as f64 * LN_SQRT_2PI;
        Ok(SurrogateState {
            data,
            scaling,
            params,
            chol: Some(chol),
            lower_rows,
            alpha,
            y_work,
            jitter,
            lml,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn data(&self) -> &TrainingData {
        &self.data
    }

    pub fn scaling(&self) -> OutputScaling {
        self.scaling
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Log marginal likelihood of the standardized outputs.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.lml
    }

    /// Lower-triangular factor of `K + σ_ε² I` (plus jitter).
    pub fn lower_factor(&self) -> Option<DMatrix<f64>> {
        self.chol.as_ref().map(|c| c.l())
    }

    /// Cached solve `(K + σ_ε² I)⁻¹ y` on the working scale.
    pub fn weights(&self) -> &DVector<f64> {
        &self.alpha
    }

    pub fn working_outputs(&self) -> &DVector<f64> {
        &self.y_work
    }

    fn forward_solve(&self, rhs: &mut [f64]) {
        let n = self.data.len();
        for i in 0..n {
            let row = &self.lower_rows[i * n..i * n + i];
            let s: f64 = row.iter().zip(&rhs[..i]).map(|(a, b)| a * b).sum();
            rhs[i] = (rhs[i] - s) / self.lower_rows[i * n + i];
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.params.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.params.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Posterior mean and variance at `(x, l)` queries.
    pub fn posterior(&self, queries: &[(&[f64], f64)]) -> Result<Vec<Prediction>> {
        let p = &self.params;
        let a_train: Vec<f64> = self
            .data
            .fidelities
            .iter()
            .map(|&l| fidelity_factor(l, p.fidelity_exponent))
            .collect();
        let mut out = Vec::with_capacity(queries.len());
        let mut k = vec![0.0; self.data.len()];
        for &(x, l) in queries {
            self.check_dim(x)?;
            let aq = fidelity_factor(l, p.fidelity_exponent);
            for (i, ki) in k.iter_mut().enumerate() {
                *ki = p.signal_variance
                    * input_unchecked(x, &self.data.inputs[i], &p.length_scales)
                    * (p.fidelity_offset + aq * a_train[i]);
            }
            let prior = p.signal_variance * (p.fidelity_offset + aq * aq);
            let mean = k.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum::<f64>();
            self.forward_solve(&mut k);
            let explained: f64 = k.iter().map(|v| v * v).sum();
            let var = (prior - explained).max(0.0);
            out.push(Prediction {
                mean: mean * self.scaling.scale + self.scaling.shift,
                variance: var * self.scaling.scale * self.scaling.scale,
            });
        }
        Ok(out)
    }

    pub fn predict(&self, x: &[f64], l: f64) -> Result<Prediction> {
        Ok(self.posterior(&[(x, l)])?[0])
    }

    /// Joint high/low-fidelity posterior at each input.
    pub fn predict_pairs(&self, xs: &[Vec<f64>]) -> Result<Vec<PairPrediction>> {
        let p = &self.params;
        let n = self.data.len();
        let a_train: Vec<f64> = self
            .data
            .fidelities
            .iter()
            .map(|&l| fidelity_factor(l, p.fidelity_exponent))
            .collect();
        // (1 - 0)^(1+δ) = 1 and (1 - 1)^(1+δ) = 0.
        let c = p.fidelity_offset;
        let s2 = self.scaling.scale * self.scaling.scale;
        let mut out = Vec::with_capacity(xs.len());
        let mut kh = vec![0.0; n];
        let mut kl = vec![0.0; n];
        for x in xs {
            self.check_dim(x)?;
            for i in 0..n {
                let base = p.signal_variance * input_unchecked(x, &self.data.inputs[i], &p.length_scales);
                kh[i] = base * c;
                kl[i] = base * (c + a_train[i]);
            }
            let mh: f64 = kh.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum();
            let ml: f64 = kl.iter().zip(self.alpha.iter()).map(|(a, b)| a * b).sum();
            self.forward_solve(&mut kh);
            self.forward_solve(&mut kl);
            let (mut hh, mut ll, mut hl) = (0.0, 0.0, 0.0);
            for i in 0..n {
                hh += kh[i] * kh[i];
                ll += kl[i] * kl[i];
                hl += kh[i] * kl[i];
            }
            let vh = (p.signal_variance * c - hh).max(0.0);
            let vl = (p.signal_variance * (c + 1.0) - ll).max(0.0);
            let cov = p.signal_variance * c - hl;
            out.push(PairPrediction {
                high: Prediction {
                    mean: mh * self.scaling.scale + self.scaling.shift,
                    variance: vh * s2,
                },
                low: Prediction {
                    mean: ml * self.scaling.scale + self.scaling.shift,
                    variance: vl * s2,
                },
                covariance: cov * s2,
            });
        }
        Ok(out)
    }
}

/// Log marginal likelihood and its gradient with respect to the log
/// parameters, in the order of [`KernelParams::to_log`].
pub fn lml_with_gradient(data: &TrainingData, params: &KernelParams, scaling: Scaling) -> Result<(f64, Vec<f64>)> {
    let objective = Likelihood::new(data, scaling);
    objective
        .evaluate(&params.to_log(), true)
        .map(|(v, g)| (-v, g.into_iter().map(|x| -x).collect()))
        .ok_or(Error::NotPositiveDefinite {
            jitter: JITTER_CAP,
        })
}

struct Likelihood<'a> {
    data: &'a TrainingData,
    y: DVector<f64>,
    /// Per-dimension squared differences, packed lower triangle.
    sq: Vec<Vec<f64>>,
}

impl<'a> Likelihood<'a> {
    fn new(data: &'a TrainingData, scaling: Scaling) -> Self {
        let s = OutputScaling::fit(&data.outputs, scaling);
        let y = DVector::from_iterator(data.len(), data.outputs.iter().map(|v| (v - s.shift) / s.scale));
        let n = data.len();
        let d = data.dim().unwrap_or(0);
        let mut sq = vec![Vec::with_capacity(n * (n + 1) / 2); d];
        for i in 0..n {
            for j in 0..=i {
                for (k, col) in sq.iter_mut().enumerate() {
                    let diff = data.inputs[i][k] - data.inputs[j][k];
                    col.push(diff * diff);
                }
            }
        }
        Likelihood { data, y, sq }
    }

    /// Negative log marginal likelihood (and gradient) at log parameters.
    fn evaluate(&self, theta: &[f64], with_grad: bool) -> Option<(f64, Vec<f64>)> {
        let p = KernelParams::from_log(theta);
        let n = self.data.len();
        let d = p.dim();
        let packed = n * (n + 1) / 2;
        let a: Vec<f64> = self
            .data
            .fidelities
            .iter()
            .map(|&l| fidelity_factor(l, p.fidelity_exponent))
            .collect();
        let mut k_input = vec![0.0; packed];
        let mut k = DMatrix::zeros(n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for (col, l) in self.sq.iter().zip(&p.length_scales) {
                    s += col[idx] / l;
                }
                let ki = (-0.5 * s).exp();
                k_input[idx] = ki;
                let v = p.signal_variance * ki * (p.fidelity_offset + a[i] * a[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
                idx += 1;
            }
        }
        let (chol, _jitter) = factorize(&k, p.noise_variance).ok()?;
        let alpha = chol.solve(&self.y);
        let l = chol.l_dirty();
        let log_det_half: f64 = (0..n).map(|i| l[(i, i)].ln()).sum();
        let lml = -0.5 * self.y.dot(&alpha) - log_det_half - n as f64 * LN_SQRT_2PI;
        if !lml.is_finite() {
            return None;
        }
        if !with_grad {
            return Some((-lml, Vec::new()));
        }

        let inv = chol.inverse();
        let log1m: Vec<f64> = self
            .data
            .fidelities
            .iter()
            .map(|&l| if l < 1.0 { (1.0 - l).ln() } else { 0.0 })
            .collect();
        let mut g = vec![0.0; d + 4];
        let mut idx = 0;
        for i in 0..n {
            for j in 0..=i {
                let mult = if i == j { 1.0 } else { 2.0 };
                let w = mult * (alpha[i] * alpha[j] - inv[(i, j)]);
                let ki = k_input[idx];
                let base = k[(i, j)];
                for (gk, (col, l)) in g[..d].iter_mut().zip(self.sq.iter().zip(&p.length_scales)) {
                    *gk += w * base * 0.5 * col[idx] / l;
                }
                g[d] += w * p.signal_variance * ki * p.fidelity_offset;
                let aa = a[i] * a[j];
                if aa > 0.0 {
                    g[d + 1] += w
                        * p.signal_variance
                        * ki
                        * aa
                        * (log1m[i] + log1m[j])
                        * (p.fidelity_exponent + DELTA_OFFSET);
                }
                g[d + 2] += w * base;
                if i == j {
                    g[d + 3] += w * p.noise_variance;
                }
                idx += 1;
            }
        }
        Some((-lml, g.into_iter().map(|v| -0.5 * v).collect()))
    }
}

/// Box for the log-space hyperparameter search.
pub fn log_bounds(dim: usize, noise_floor: f64) -> (Vec<f64>, Vec<f64>) {
    let mut lo = vec![1e-3f64.ln(); dim];
    let mut hi = vec![1e3f64.ln(); dim];
    lo.extend([1e-3f64.ln(), DELTA_OFFSET.ln(), 1e-3f64.ln(), noise_floor.ln()]);
    hi.extend([1e3f64.ln(), 10f64.ln(), 1e3f64.ln(), 1f64.ln()]);
    (lo, hi)
}

fn random_start(dim: usize, noise_floor: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut log_uniform = |lo: f64, hi: f64| rng.uniform_in(lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..dim).map(|_| log_uniform(1e-2, 1e1)).collect();
    v.push(log_uniform(1e-2, 1e1));
    v.push(log_uniform(1e-2, 1e1));
    v.push(log_uniform(1e-1, 1e1));
    v.push(log_uniform(noise_floor.min(1e-2), 1e-1));
    v
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Number of local searches. The first starts from the warm start when
    /// one is given, otherwise from [`KernelParams::initial`].
    pub restarts: usize,
    pub warm_start: Option<KernelParams>,
    pub scaling: Scaling,
    /// Smallest admissible noise variance on the working scale.
    pub noise_floor: f64,
    pub lbfgs: LbfgsOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 8,
            warm_start: None,
            scaling: Scaling::Standardize,
            noise_floor: NOISE_FLOOR,
            lbfgs: LbfgsOptions {
                max_iters: 60,
                grad_tol: 1e-4,
                rel_tol: 1e-9,
                ..Default::default()
            },
        }
    }
}

/// Maximum-likelihood fit with `restarts` local searches.
pub fn fit(data: &TrainingData, restarts: usize, rng: &mut RngStream) -> Result<SurrogateState> {
    fit_with(
        data,
        &FitOptions {
            restarts,
            ..Default::default()
        },
        rng,
    )
}

pub fn fit_with(data: &TrainingData, opts: &FitOptions, rng: &mut RngStream) -> Result<SurrogateState> {
    if data.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: data.len(),
        });
    }
    let dim = data.dim().unwrap_or(0);
    if !(opts.noise_floor > 0.0 && opts.noise_floor < 1.0) {
        return Err(Error::config("noise_floor", format!("{} must lie in (0, 1)", opts.noise_floor)));
    }
    let (lo, hi) = log_bounds(dim, opts.noise_floor);
    let mut starts: Vec<Vec<f64>> = Vec::new();
    match &opts.warm_start {
        Some(w) if w.dim() == dim => starts.push(w.to_log()),
        _ => starts.push(KernelParams::initial(dim).to_log()),
    }
    while starts.len() < opts.restarts.max(1) {
        starts.push(random_start(dim, opts.noise_floor, rng));
    }

    let objective = Likelihood::new(data, opts.scaling);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for s in &starts {
        let Some(m) = lbfgs_box(|t| objective.evaluate(t, true), s, &lo, &hi, &opts.lbfgs) else {
            continue;
        };
        if best.as_ref().is_none_or(|(v, _)| m.value < *v) {
            best = Some((m.value, m.x));
        }
    }
    let (_, theta) = best.ok_or(Error::NotPositiveDefinite {
        jitter: JITTER_CAP,
    })?;
    SurrogateState::condition(data.clone(), KernelParams::from_log(&theta), opts.scaling)
}
