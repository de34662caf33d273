//! The bootstrap engine: replicated top-k spectra of resampled covariances,
//! transformations, scale estimates and max/min statistics.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::linalg::{
    factor_top_eigenvalues, sample_covariance, top_eigenpairs, FactorRoute, FactorSolve, Spectrum,
    SubspaceOptions,
};
use crate::resample::{resample_indices, StreamKey};

/// Monotone map applied to the statistic before forming intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Transformation {
    Log,
    /// `x^a` with `a ∈ (0, 1]`.
    Power(f64),
    Identity,
}

impl Transformation {
    pub fn sqrt() -> Self {
        Self::Power(0.5)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Power(a) if !(*a > 0.0 && *a <= 1.0) => {
                Err(arg("transform", format!("power exponent {a} must lie in (0, 1]")))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Self::Log => x.ln(),
            Self::Power(a) if *a == 0.5 => x.max(0.0).sqrt(),
            Self::Power(a) => x.max(0.0).powf(*a),
            Self::Identity => x,
        }
    }

    /// Inverse on the image of `[0, ∞)`; inputs below the image are clamped
    /// to its infimum first.
    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            Self::Log => y.exp(),
            Self::Power(a) => y.max(0.0).powf(a.recip()),
            Self::Identity => y,
        }
    }

    /// Infimum of `h` over the statistic's domain.
    pub fn lower_bound(&self) -> f64 {
        match self {
            Self::Log => f64::NEG_INFINITY,
            Self::Power(_) => 0.0,
            Self::Identity => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Log => f.write_str("log"),
            Self::Identity => f.write_str("identity"),
            Self::Power(a) if *a == 0.5 => f.write_str("sqrt"),
            Self::Power(a) => write!(f, "power:{a}"),
        }
    }
}

impl FromStr for Transformation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = match s.to_ascii_lowercase().as_str() {
            "log" => Self::Log,
            "identity" | "id" | "standardization" => Self::Identity,
            "sqrt" => Self::sqrt(),
            other => {
                let a = other
                    .strip_prefix("power:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config {
                        field: "transform".into(),
                        reason: format!("unknown transform `{s}` (log, sqrt, identity, power:<a>)"),
                    })?;
                Self::Power(a)
            }
        };
        t.validate()?;
        Ok(t)
    }
}

/// Elementwise `h`, rejecting non-positive inputs under `Log`.
pub fn apply_transform(h: Transformation, values: &[f64]) -> Result<Vec<f64>> {
    if h == Transformation::Log {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::Domain { index, value });
        }
    }
    Ok(values.iter().map(|&v| h.apply(v)).collect())
}

/// What a set of bootstrap draws measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    /// λ_j(Σ̂), j = 1..k.
    Eigenvalues,
    /// π_j(Σ̂) = (λ₁ + … + λ_j) / tr(Σ̂), j = 1..k.
    Proportions,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Eigenvalues => "eigenvalues",
            Self::Proportions => "proportions",
        })
    }
}

/// Replicated top-k spectra of the resampled covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapReplicates {
    /// Top-k eigenvalues of the original sample covariance.
    pub lam_hat: Spectrum,
    /// Trace of the original sample covariance.
    pub trace_hat: f64,
    /// B x k; row b holds λ₁(Σ̂*_b) ≥ … ≥ λ_k(Σ̂*_b).
    pub reps: DMatrix<f64>,
    /// tr(Σ̂*_b) for each replicate.
    pub traces: Vec<f64>,
}

impl BootstrapReplicates {
    pub fn b(&self) -> usize {
        self.reps.nrows()
    }

    pub fn k(&self) -> usize {
        self.reps.ncols()
    }

    /// The draws for one statistic, with the original-sample point estimate.
    pub fn statistic(&self, statistic: Statistic) -> StatisticDraws {
        match statistic {
            Statistic::Eigenvalues => StatisticDraws {
                statistic,
                point: self.lam_hat.values().to_vec(),
                draws: self.reps.clone(),
            },
            Statistic::Proportions => {
                let point = proportions(self.lam_hat.values(), self.trace_hat);
                let mut draws = self.reps.clone();
                for (b, mut row) in draws.row_iter_mut().enumerate() {
                    let vals: Vec<f64> = row.iter().copied().collect();
                    for (j, v) in proportions(&vals, self.traces[b]).into_iter().enumerate() {
                        row[j] = v;
                    }
                }
                StatisticDraws {
                    statistic,
                    point,
                    draws,
                }
            }
        }
    }
}

/// Cumulative explained-variance shares, clamped to [0, 1].
pub fn proportions(top: &[f64], trace: f64) -> Vec<f64> {
    let mut acc = 0.0;
    top.iter()
        .map(|v| {
            acc += v;
            if trace > 0.0 {
                (acc / trace).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect()
}

/// Point estimate plus B x k bootstrap draws of a k-vector statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct StatisticDraws {
    pub statistic: Statistic,
    pub point: Vec<f64>,
    pub draws: DMatrix<f64>,
}

impl StatisticDraws {
    pub fn b(&self) -> usize {
        self.draws.nrows()
    }

    pub fn k(&self) -> usize {
        self.draws.ncols()
    }
}

impl From<&BootstrapReplicates> for StatisticDraws {
    fn from(reps: &BootstrapReplicates) -> Self {
        reps.statistic(Statistic::Eigenvalues)
    }
}

/// Randomness and numerics of one bootstrap run. Replicate `b` draws from
/// `key.with("rep", b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateScheme {
    pub key: StreamKey,
    /// Re-center each resample at its own mean (real data) instead of using
    /// the uncentered form (simulations with E X = 0).
    pub centered: bool,
    pub route: FactorRoute,
    pub subspace: SubspaceOptions,
}

impl ReplicateScheme {
    pub fn new(key: StreamKey) -> Self {
        Self {
            key,
            centered: false,
            route: FactorRoute::Auto,
            subspace: SubspaceOptions::default(),
        }
    }

    pub fn centered(mut self, centered: bool) -> Self {
        self.centered = centered;
        self
    }

    pub fn route(mut self, route: FactorRoute) -> Self {
        self.route = route;
        self
    }
}

/// Width of the warm-start block used by the subspace route.
fn block_size(k: usize, p: usize) -> Option<usize> {
    let b = (2 * k).max(k + 8);
    (b < p).then_some(b)
}

/// Data prepared once and shared read-only by all replicates.
pub struct ReplicateEngine<'a> {
    data: &'a DMatrix<f64>,
    k: usize,
    centered: bool,
    route: FactorRoute,
    subspace: SubspaceOptions,
    warm: Option<DMatrix<f64>>,
    lam_hat: Spectrum,
    trace_hat: f64,
}

impl<'a> ReplicateEngine<'a> {
    pub fn new(data: &'a DMatrix<f64>, k: usize, scheme: &ReplicateScheme) -> Result<Self> {
        let (n, p) = data.shape();
        if n == 0 || p == 0 {
            return Err(Error::Dimension("data matrix is empty".into()));
        }
        if k == 0 || k > p.min(n) {
            return Err(arg(
                "k",
                format!("k = {k} exceeds min(n, p) = {} for a {n}x{p} dataset", n.min(p)),
            ));
        }
        let cov = sample_covariance(data, scheme.centered)?;
        let trace_hat = cov.trace();
        let block = block_size(k, p);
        let (values, warm) = match block {
            Some(b) if scheme.route != FactorRoute::Covariance && scheme.route != FactorRoute::Gram => {
                let (vals, vecs) = top_eigenpairs(&cov, b)?;
                (vals, Some(vecs))
            }
            _ => {
                let s = cov.spectrum()?;
                (s.values().to_vec(), None)
            }
        };
        let lam_hat = Spectrum::from_raw(values)?.top(k)?;
        let top = lam_hat.largest();
        let kth = lam_hat.values()[k - 1];
        if top <= 0.0 || kth <= 1e-12 * top {
            return Err(arg(
                "k",
                format!("k = {k} exceeds the number of nonzero sample eigenvalues"),
            ));
        }
        Ok(Self {
            data,
            k,
            centered: scheme.centered,
            route: scheme.route,
            subspace: scheme.subspace,
            warm,
            lam_hat,
            trace_hat,
        })
    }

    pub fn lam_hat(&self) -> &Spectrum {
        &self.lam_hat
    }

    /// Top-k eigenvalues and trace of the covariance of one resample.
    pub fn replicate(&self, key: &StreamKey) -> Result<(Vec<f64>, f64)> {
        self.replicate_detailed(key).map(|(v, t, _)| (v, t))
    }

    /// As [`replicate`](Self::replicate), also reporting the solver route.
    pub fn replicate_detailed(&self, key: &StreamKey) -> Result<(Vec<f64>, f64, FactorSolve)> {
        let (n, p) = self.data.shape();
        let mut rng = key.stream();
        let counts = resample_indices(n, &mut rng).counts();
        let nf = n as f64;
        let mean = self.centered.then(|| {
            let mut mean = vec![0.0; p];
            for &(i, w) in &counts {
                let w = w as f64 / nf;
                for (j, m) in mean.iter_mut().enumerate() {
                    *m += w * self.data[(i, j)];
                }
            }
            mean
        });
        // Σ̂* = YᵀY with row r of Y equal to sqrt(w_r / n)·(x_r − mean*)
        let mut y = DMatrix::zeros(counts.len(), p);
        for j in 0..p {
            let shift = mean.as_ref().map_or(0.0, |m| m[j]);
            let col = self.data.column(j);
            let mut out = y.column_mut(j);
            for (r, &(i, w)) in counts.iter().enumerate() {
                out[r] = (w as f64 / nf).sqrt() * (col[i] - shift);
            }
        }
        let trace = y.norm_squared();
        let (values, solve) =
            factor_top_eigenvalues(&y, self.k, self.warm.as_ref(), self.route, self.subspace)?;
        Ok((values, trace, solve))
    }
}

/// B replicates of the top-k eigenvalues of the resampled covariance.
///
/// Replicates run on the current rayon pool; the output depends only on the
/// data and `scheme`, never on the number of workers.
pub fn replicate_eigenvalues(
    data: &DMatrix<f64>,
    k: usize,
    b: usize,
    scheme: &ReplicateScheme,
) -> Result<BootstrapReplicates> {
    if b < 2 {
        return Err(arg("B", format!("need at least 2 replicates, got {b}")));
    }
    let engine = ReplicateEngine::new(data, k, scheme)?;
    let rows: Vec<(Vec<f64>, f64)> = (0..b)
        .into_par_iter()
        .map(|r| engine.replicate(&scheme.key.with("rep", r as u64)))
        .collect::<Result<_>>()?;
    let mut reps = DMatrix::zeros(b, k);
    let mut traces = Vec::with_capacity(b);
    for (r, (vals, tr)) in rows.into_iter().enumerate() {
        for (j, v) in vals.into_iter().enumerate() {
            reps[(r, j)] = v;
        }
        traces.push(tr);
    }
    Ok(BootstrapReplicates {
        lam_hat: engine.lam_hat,
        trace_hat: engine.trace_hat,
        reps,
        traces,
    })
}

/// Bootstrap standard deviations of `h(statistic_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaHat {
    pub values: Vec<f64>,
}

impl SigmaHat {
    /// `ς̂_j^τ`, with `ς̂^0 = 1` even when `ς̂ = 0`.
    pub fn powered(&self, tau: f64) -> Vec<f64> {
        self.values
            .iter()
            .map(|&s| if tau == 0.0 { 1.0 } else { s.powf(tau) })
            .collect()
    }
}

/// Column-wise sample standard deviation (divisor B − 1) of `h(draws)`.
pub fn sigma_hat(draws: &StatisticDraws, h: Transformation) -> Result<SigmaHat> {
    let b = draws.b();
    if b < 2 {
        return Err(arg("B", format!("need at least 2 replicates, got {b}")));
    }
    let values = (0..draws.k())
        .map(|j| {
            let col: Vec<f64> = draws.draws.column(j).iter().copied().collect();
            let t = apply_transform(h, &col)?;
            let mean = t.iter().sum::<f64>() / b as f64;
            let ss = t.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            Ok((ss / (b - 1) as f64).sqrt())
        })
        .collect::<Result<_>>()?;
    Ok(SigmaHat { values })
}

/// Bootstrap samples of the max and min partially standardized deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinSamples {
    pub max: Vec<f64>,
    pub min: Vec<f64>,
}

/// `M*_b = max_j (h(draw_bj) − h(point_j)) / ς̂_j^τ` and the matching min.
pub fn max_min_stats(
    draws: &StatisticDraws,
    h: Transformation,
    sig: &SigmaHat,
    tau: f64,
) -> Result<MaxMinSamples> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(arg("tau", format!("tau = {tau} must lie in [0, 1]")));
    }
    let k = draws.k();
    if sig.values.len() != k || draws.point.len() != k {
        return Err(Error::Dimension("scale, point and draws disagree on k".into()));
    }
    if tau > 0.0 {
        let indices: Vec<usize> = (0..k).filter(|&j| sig.values[j] <= 0.0).collect();
        if !indices.is_empty() {
            return Err(Error::DegenerateScale { indices });
        }
    }
    let scale = sig.powered(tau);
    let centre = apply_transform(h, &draws.point)?;
    let mut max = Vec::with_capacity(draws.b());
    let mut min = Vec::with_capacity(draws.b());
    for (b, row) in draws.draws.row_iter().enumerate() {
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..k {
            let x = row[j];
            if h == Transformation::Log && x <= 0.0 {
                return Err(Error::Domain {
                    index: b * k + j,
                    value: x,
                });
            }
            let dev = (h.apply(x) - centre[j]) / scale[j];
            hi = hi.max(dev);
            lo = lo.min(dev);
        }
        max.push(hi);
        min.push(lo);
    }
    Ok(MaxMinSamples { max, min })
}

/// The ⌈B·α⌉-th smallest sample (1-indexed).
pub fn empirical_quantile(samples: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(arg("alpha", format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if samples.is_empty() {
        return Err(arg("samples", "no samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted[order_index(sorted.len(), alpha)])
}

/// Zero-based index of the ⌈B·α⌉-th order statistic. The product is nudged
/// down by 1e-9 so that e.g. 1000 × 0.975 lands on 975 despite rounding.
pub(crate) fn order_index(b: usize, alpha: f64) -> usize {
    let rank = (b as f64 * alpha - 1e-9).ceil() as usize;
    rank.clamp(1, b) - 1
}
