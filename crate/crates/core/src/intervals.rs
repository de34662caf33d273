//! Simultaneous confidence bands from bootstrap max/min statistics, the
//! data-adaptive choice of the standardization exponent τ, and the
//! component-selection rule for explained-variance bands.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    empirical_quantile, max_min_stats, replicate_eigenvalues, sigma_hat, ReplicateScheme, SigmaHat,
    Statistic, StatisticDraws, Transformation,
};
use crate::error::{arg, Error, Result};

/// τ candidates searched by [`select_tau`].
pub const TAU_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// k simultaneous intervals on the statistic's original scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceBand {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub point: Vec<f64>,
    pub transform: Transformation,
    pub tau: f64,
    pub alpha: f64,
    pub statistic: Statistic,
}

impl ConfidenceBand {
    pub fn k(&self) -> usize {
        self.point.len()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn mean_width(&self) -> f64 {
        self.widths().iter().sum::<f64>() / self.k() as f64
    }

    /// Whether every `truth[j]` lies in interval j.
    pub fn covers(&self, truth: &[f64]) -> bool {
        truth.len() == self.k()
            && truth
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (l, u))| l <= t && t <= u)
    }
}

/// Intervals `h⁻¹([h(θ̂_j) − ς̂_j^τ q̂_M(1−α/2), h(θ̂_j) − ς̂_j^τ q̂_L(α/2)])`.
pub fn build_band(draws: &StatisticDraws, h: Transformation, tau: f64, alpha: f64) -> Result<ConfidenceBand> {
    let sig = sigma_hat(draws, h)?;
    band_with_scale(draws, h, &sig, tau, alpha)
}

fn band_with_scale(
    draws: &StatisticDraws,
    h: Transformation,
    sig: &SigmaHat,
    tau: f64,
    alpha: f64,
) -> Result<ConfidenceBand> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(arg("alpha", format!("alpha = {alpha} must lie in (0, 1)")));
    }
    let stats = max_min_stats(draws, h, sig, tau)?;
    let q_max = empirical_quantile(&stats.max, 1.0 - alpha / 2.0)?;
    let q_min = empirical_quantile(&stats.min, alpha / 2.0)?;
    let scale = sig.powered(tau);
    let floor = h.lower_bound();
    let mut lower = Vec::with_capacity(draws.k());
    let mut upper = Vec::with_capacity(draws.k());
    for (j, &theta) in draws.point.iter().enumerate() {
        let centre = h.apply(theta);
        let lo = (centre - scale[j] * q_max).max(floor);
        let hi = (centre - scale[j] * q_min).max(floor);
        let (mut lo, mut hi) = (h.inverse(lo), h.inverse(hi));
        if draws.statistic == Statistic::Proportions {
            lo = lo.clamp(0.0, 1.0);
            hi = hi.clamp(0.0, 1.0);
        }
        lower.push(lo);
        upper.push(hi);
    }
    Ok(ConfidenceBand {
        lower,
        upper,
        point: draws.point.clone(),
        transform: h,
        tau,
        alpha,
        statistic: draws.statistic,
    })
}

/// Like [`build_band`], but a zero bootstrap scale under τ > 0 falls back
/// to τ = 0 with a warning. The flag reports whether that happened.
pub fn build_band_or_fallback(
    draws: &StatisticDraws,
    h: Transformation,
    tau: f64,
    alpha: f64,
) -> Result<(ConfidenceBand, bool)> {
    match build_band(draws, h, tau, alpha) {
        Err(Error::DegenerateScale { indices }) => {
            log::warn!("zero bootstrap scale at indices {indices:?}; using tau = 0 instead of {tau}");
            Ok((build_band(draws, h, 0.0, alpha)?, true))
        }
        other => other.map(|b| (b, false)),
    }
}

/// Fixed τ or the width-based search over [`TAU_GRID`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TauMode {
    Fixed(f64),
    Adaptive,
}

impl fmt::Display for TauMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(t) => write!(f, "{t}"),
            Self::Adaptive => f.write_str("adaptive"),
        }
    }
}

impl FromStr for TauMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("adaptive") {
            return Ok(Self::Adaptive);
        }
        match s.parse::<f64>() {
            Ok(t) if (0.0..=1.0).contains(&t) => Ok(Self::Fixed(t)),
            _ => Err(Error::Config {
                field: "tau".into(),
                reason: format!("expected `adaptive` or a number in [0, 1], got `{s}`"),
            }),
        }
    }
}

/// Outcome of the τ search.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSelection {
    pub grid: Vec<f64>,
    /// `μ̂(τ) + σ̂(τ)` per candidate; `None` where τ > 0 met a zero scale.
    pub scores: Vec<Option<f64>>,
    pub chosen: f64,
    pub band: ConfidenceBand,
}

/// Mean plus population standard deviation (divisor k) of the widths.
pub fn width_score(widths: &[f64]) -> f64 {
    let k = widths.len() as f64;
    let mean = widths.iter().sum::<f64>() / k;
    let var = widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / k;
    mean + var.sqrt()
}

/// Index of the smallest score; ties go to the earliest (smallest τ).
pub fn argmin_score(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((i, s));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Picks τ on [`TAU_GRID`] minimizing mean width plus width spread.
pub fn select_tau(draws: &StatisticDraws, h: Transformation, alpha: f64) -> Result<TauSelection> {
    let sig = sigma_hat(draws, h)?;
    let mut bands = Vec::with_capacity(TAU_GRID.len());
    let mut scores = Vec::with_capacity(TAU_GRID.len());
    for &tau in &TAU_GRID {
        match band_with_scale(draws, h, &sig, tau, alpha) {
            Ok(band) => {
                scores.push(Some(width_score(&band.widths())));
                bands.push(Some(band));
            }
            Err(Error::DegenerateScale { .. }) => {
                scores.push(None);
                bands.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let idx = argmin_score(&scores).unwrap_or(0);
    let band = match bands.swap_remove(idx) {
        Some(b) => b,
        None => band_with_scale(draws, h, &sig, 0.0, alpha)?,
    };
    Ok(TauSelection {
        grid: TAU_GRID.to_vec(),
        scores,
        chosen: band.tau,
        band,
    })
}

/// Band under a τ mode. A fixed τ > 0 that meets a zero bootstrap scale
/// falls back to τ = 0 with a warning; the returned band records the τ used.
pub fn band_for_mode(draws: &StatisticDraws, h: Transformation, mode: TauMode, alpha: f64) -> Result<ConfidenceBand> {
    match mode {
        TauMode::Fixed(tau) => Ok(build_band_or_fallback(draws, h, tau, alpha)?.0),
        TauMode::Adaptive => Ok(select_tau(draws, h, alpha)?.band),
    }
}

/// Simultaneous band for the explained-variance proportions π₁..π_k.
pub fn proportion_band(
    data: &DMatrix<f64>,
    k: usize,
    b: usize,
    h: Transformation,
    mode: TauMode,
    alpha: f64,
    scheme: &ReplicateScheme,
) -> Result<ConfidenceBand> {
    let reps = replicate_eigenvalues(data, k, b, scheme)?;
    if reps.trace_hat <= 0.0 {
        return Err(Error::Degenerate("sample covariance has zero trace".into()));
    }
    band_for_mode(&reps.statistic(Statistic::Proportions), h, mode, alpha)
}

/// Smallest j (1-based) whose lower proportion bound exceeds `threshold`.
pub fn select_components(band: &ConfidenceBand, threshold: f64) -> Option<usize> {
    band.lower.iter().position(|&l| l > threshold).map(|j| j + 1)
}
