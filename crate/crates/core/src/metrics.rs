//! Verification experiments: a grid estimator of the multivariate
//! Kolmogorov distance Δn between the bootstrap law and the sampling law,
//! the coverage/width driver, and the log-log rate fit.
//!
//! Δn is a theoretical quantity; [`estimate_delta_n`] is a Monte Carlo
//! construction of this library, not an estimator taken from the literature.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bootstrap::{replicate_eigenvalues, ReplicateScheme, Statistic, Transformation};
use crate::error::{arg, Error, Result};
use crate::intervals::{band_for_mode, TauMode};
use crate::linalg::{haar_orthogonal, top_eigenvalues_of_data, EigenRoute, FactorRoute};
use crate::models::{sample_dataset, DecayProfile, GeneratorFamily, PopulationModel};
use crate::resample::StreamKey;

/// m sample vectors in R^k, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfSampleSet {
    points: DMatrix<f64>,
}

impl EcdfSampleSet {
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(arg("points", "a sample set needs at least one row and one column"));
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("rows of a sample set differ in length".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), k, |i, j| rows[i][j]))
    }

    pub fn m(&self) -> usize {
        self.points.nrows()
    }

    pub fn k(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    /// Fraction of rows with every coordinate ≤ `t`.
    pub fn ecdf(&self, t: &[f64]) -> f64 {
        let hits = self
            .points
            .row_iter()
            .filter(|row| row.iter().zip(t).all(|(x, ti)| x <= ti))
            .count();
        hits as f64 / self.m() as f64
    }
}

/// Rows of both sets plus the all-+∞ corner.
pub fn pooled_grid(a: &EcdfSampleSet, b: &EcdfSampleSet) -> Vec<Vec<f64>> {
    let mut grid: Vec<Vec<f64>> = a
        .points
        .row_iter()
        .chain(b.points.row_iter())
        .map(|r| r.iter().copied().collect())
        .collect();
    grid.push(vec![f64::INFINITY; a.k()]);
    grid
}

/// `max_t |F_A(t) − F_B(t)|` over the grid.
pub fn kolmogorov_distance(a: &EcdfSampleSet, b: &EcdfSampleSet, grid: &[Vec<f64>]) -> Result<f64> {
    if grid.is_empty() {
        return Err(arg("grid", "empty evaluation grid"));
    }
    if a.k() != b.k() || grid.iter().any(|t| t.len() != a.k()) {
        return Err(Error::Dimension(format!(
            "sample sets and grid must share dimension (got {}, {})",
            a.k(),
            b.k()
        )));
    }
    Ok(grid
        .iter()
        .map(|t| (a.ecdf(t) - b.ecdf(t)).abs())
        .fold(0.0, f64::max))
}

/// [`kolmogorov_distance`] on the [`pooled_grid`]: exact for k = 1, a lower
/// bound on the supremum over R^k otherwise.
pub fn pooled_kolmogorov_distance(a: &EcdfSampleSet, b: &EcdfSampleSet) -> Result<f64> {
    kolmogorov_distance(a, b, &pooled_grid(a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaEstimate {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    /// Grid points per distance evaluation.
    pub grid_size: usize,
    /// Median of `per_dataset`.
    pub delta_hat: f64,
    pub datasets: usize,
    pub replicates: usize,
    /// Distance for each held-out dataset.
    pub per_dataset: Vec<f64>,
}

/// Monte Carlo sizes for [`estimate_delta_n`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaPlan {
    pub n: usize,
    pub k: usize,
    /// Independent datasets for the sampling law.
    pub datasets: usize,
    /// Bootstrap replicates per held-out dataset.
    pub replicates: usize,
    /// Held-out datasets; Δn is reported as their median.
    pub held_out: usize,
}

/// Compares `√n(λ_k(Σ̂_m) − λ_k(Σ))` over independent datasets with
/// `√n(λ_k(Σ̂*) − λ_k(Σ̂))` on each held-out dataset.
pub fn estimate_delta_n(model: &PopulationModel, plan: DeltaPlan, key: &StreamKey) -> Result<DeltaEstimate> {
    let DeltaPlan { n, k, datasets, replicates, held_out } = plan;
    if datasets == 0 || held_out == 0 {
        return Err(arg("M", "need at least one dataset and one held-out dataset"));
    }
    let p = model.dim();
    if k == 0 || k > p.min(n) {
        return Err(arg("k", format!("k = {k} must lie in 1..={}", p.min(n))));
    }
    let truth = model.spectrum.top(k)?;
    let root_n = (n as f64).sqrt();
    let sampling: Vec<Vec<f64>> = (0..datasets)
        .into_par_iter()
        .map(|m| {
            let data = sample_dataset(model, n, &mut key.with("delta-data", m as u64).stream()).data;
            let top = top_eigenvalues_of_data(&data, k, EigenRoute::Auto)?;
            Ok(top
                .values()
                .iter()
                .zip(truth.values())
                .map(|(a, b)| root_n * (a - b))
                .collect())
        })
        .collect::<Result<_>>()?;
    let sampling = EcdfSampleSet::from_rows(&sampling)?;

    let mut per_dataset = Vec::with_capacity(held_out);
    let mut grid_size = 0;
    for r in 0..held_out {
        let r = r as u64;
        let data = sample_dataset(model, n, &mut key.with("delta-heldout", r).stream()).data;
        let scheme = ReplicateScheme::new(key.with("delta-boot", r));
        let reps = replicate_eigenvalues(&data, k, replicates, &scheme)?;
        let centre = reps.lam_hat.values().to_vec();
        let mut boot = reps.reps;
        for mut row in boot.row_iter_mut() {
            for (v, c) in row.iter_mut().zip(&centre) {
                *v = root_n * (*v - c);
            }
        }
        let boot = EcdfSampleSet::new(boot)?;
        let grid = pooled_grid(&sampling, &boot);
        grid_size = grid.len();
        per_dataset.push(kolmogorov_distance(&sampling, &boot, &grid)?);
    }
    Ok(DeltaEstimate {
        n,
        p,
        k,
        grid_size,
        delta_hat: median(&per_dataset),
        datasets,
        replicates,
        per_dataset,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Least-squares slope of `ln Δ` against `ln n`. Points with Δ ≤ 0 are
/// dropped with a warning.
pub fn rate_slope(points: &[(usize, f64)]) -> Result<f64> {
    let mut ns: Vec<usize> = points.iter().map(|(n, _)| *n).collect();
    ns.sort_unstable();
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(arg("n", "sample sizes must be distinct"));
    }
    let kept: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&(n, d)| {
            if d > 0.0 && n > 0 {
                Some(((n as f64).ln(), d.ln()))
            } else {
                log::warn!("dropping rate point n = {n} with delta = {d}");
                None
            }
        })
        .collect();
    if kept.len() < 3 {
        return Err(Error::Insufficient(format!(
            "{} usable rate points; need at least 3",
            kept.len()
        )));
    }
    let m = kept.len() as f64;
    let mx = kept.iter().map(|p| p.0).sum::<f64>() / m;
    let my = kept.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = kept.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = kept.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// One simulated coverage experiment over an (n, p) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageConfig {
    pub generator: GeneratorFamily,
    pub decay: DecayProfile,
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<usize>,
    pub k: usize,
    pub statistic: Statistic,
    pub transform: Transformation,
    pub tau: TauMode,
    pub alpha: f64,
    pub trials: usize,
    pub b: usize,
    pub seed: u64,
    pub route: FactorRoute,
}

impl CoverageConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| Error::Config { field: field.into(), reason };
        self.decay.validate()?;
        self.transform.validate()?;
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(bad("n", "grid must be non-empty with positive entries".into()));
        }
        if self.p_grid.is_empty() || self.p_grid.contains(&0) {
            return Err(bad("p", "grid must be non-empty with positive entries".into()));
        }
        if self.k == 0 {
            return Err(bad("k", "k must be positive".into()));
        }
        if let Some(&p) = self.p_grid.iter().find(|&&p| p < self.k) {
            return Err(bad("k", format!("k = {} exceeds p = {p}", self.k)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(bad("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if self.trials == 0 {
            return Err(bad("trials", "need at least one trial".into()));
        }
        if self.b < 2 {
            return Err(bad("B", format!("need at least 2 replicates, got {}", self.b)));
        }
        if let TauMode::Fixed(t) = self.tau {
            if !(0.0..=1.0).contains(&t) {
                return Err(bad("tau", format!("{t} is not in [0, 1]")));
            }
        }
        for &p in &self.p_grid {
            self.decay.eigenvalues(p)?;
        }
        Ok(())
    }
}

/// Aggregated result of one (n, p) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub model: String,
    pub decay_kind: String,
    pub decay_param: f64,
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub statistic: Statistic,
    pub transform: Transformation,
    pub tau_mode: TauMode,
    pub alpha: f64,
    pub trials: usize,
    pub b: usize,
    pub coverage: f64,
    /// Mean over successful trials of the per-trial mean interval width.
    pub avg_width: f64,
    pub width_sd: f64,
    pub coverage_se: f64,
    /// Trials whose interval construction failed; counted as not covering.
    pub failures: usize,
    pub seed: u64,
}

enum TrialOutcome {
    Done { covered: bool, width: f64 },
    Failed,
}

/// The population for column p of the grid; the basis depends only on the
/// seed and p, so it is shared across n.
pub fn cell_population(cfg: &CoverageConfig, p: usize) -> Result<PopulationModel> {
    let spectrum = cfg.decay.eigenvalues(p)?;
    let basis = haar_orthogonal(p, &mut StreamKey::new(cfg.seed).with("basis", p as u64).stream())?;
    PopulationModel::new(spectrum, basis, cfg.generator)
}

fn truth(model: &PopulationModel, k: usize, statistic: Statistic) -> Result<Vec<f64>> {
    let top = model.spectrum.top(k)?;
    Ok(match statistic {
        Statistic::Eigenvalues => top.values().to_vec(),
        Statistic::Proportions => crate::bootstrap::proportions(top.values(), model.spectrum.sum()),
    })
}

fn run_trial(
    cfg: &CoverageConfig,
    model: &PopulationModel,
    truth: &[f64],
    n: usize,
    key: &StreamKey,
) -> Result<TrialOutcome> {
    let data = sample_dataset(model, n, &mut key.with("data", 0).stream()).data;
    let scheme = ReplicateScheme::new(key.with("boot", 0)).route(cfg.route);
    let reps = replicate_eigenvalues(&data, cfg.k, cfg.b, &scheme)?;
    let band = band_for_mode(&reps.statistic(cfg.statistic), cfg.transform, cfg.tau, cfg.alpha)?;
    Ok(TrialOutcome::Done {
        covered: band.covers(truth),
        width: band.mean_width(),
    })
}

/// Runs every (n, p) cell; trials run in parallel and are reduced in trial
/// order, so records do not depend on the worker count.
pub fn coverage_experiment(cfg: &CoverageConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let mut records = Vec::with_capacity(cfg.n_grid.len() * cfg.p_grid.len());
    for &n in &cfg.n_grid {
        for &p in &cfg.p_grid {
            if cfg.k > n {
                return Err(Error::Config {
                    field: "k".into(),
                    reason: format!("k = {} exceeds n = {n}", cfg.k),
                });
            }
            let model = cell_population(cfg, p)?;
            let truth = truth(&model, cfg.k, cfg.statistic)?;
            let cell = StreamKey::new(cfg.seed).with("cell-n", n as u64).with("cell-p", p as u64);
            let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    run_trial(cfg, &model, &truth, n, &cell.with("trial", t as u64)).unwrap_or_else(|e| {
                        log::debug!("trial {t} at n = {n}, p = {p} failed: {e}");
                        TrialOutcome::Failed
                    })
                })
                .collect();
            records.push(summarize(cfg, n, p, &outcomes));
        }
    }
    Ok(records)
}

fn summarize(cfg: &CoverageConfig, n: usize, p: usize, outcomes: &[TrialOutcome]) -> ExperimentRecord {
    let mut covered = 0usize;
    let mut failures = 0usize;
    let mut widths = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            TrialOutcome::Done { covered: c, width } => {
                covered += usize::from(*c);
                widths.push(*width);
            }
            TrialOutcome::Failed => failures += 1,
        }
    }
    if failures > 0 {
        log::warn!("{failures} of {} trials failed at n = {n}, p = {p}", cfg.trials);
    }
    let trials = cfg.trials as f64;
    let coverage = covered as f64 / trials;
    let (avg_width, width_sd) = match widths.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (widths[0], 0.0),
        m => {
            let mean = widths.iter().sum::<f64>() / m as f64;
            let var = widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            (mean, var.sqrt())
        }
    };
    ExperimentRecord {
        model: cfg.generator.name().into(),
        decay_kind: cfg.decay.kind().into(),
        decay_param: cfg.decay.parameter(),
        n,
        p,
        k: cfg.k,
        statistic: cfg.statistic,
        transform: cfg.transform,
        tau_mode: cfg.tau,
        alpha: cfg.alpha,
        trials: cfg.trials,
        b: cfg.b,
        coverage,
        avg_width,
        width_sd,
        coverage_se: (coverage * (1.0 - coverage) / trials).sqrt(),
        failures,
        seed: cfg.seed,
    }
}

/// Δn estimates along an n grid at fixed p, plus the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    pub generator: GeneratorFamily,
    pub decay: DecayProfile,
    pub p: usize,
    pub k: usize,
    pub n_grid: Vec<usize>,
    pub datasets: usize,
    pub replicates: usize,
    pub held_out: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub estimates: Vec<DeltaEstimate>,
    /// `None` when fewer than three usable points exist.
    pub slope: Option<f64>,
}

pub fn rate_study(cfg: &RateConfig) -> Result<RateStudy> {
    cfg.decay.validate()?;
    let mut sorted = cfg.n_grid.clone();
    sorted.sort_unstable();
    if sorted.is_empty() || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config {
            field: "n".into(),
            reason: "grid must be non-empty with distinct values".into(),
        });
    }
    if cfg.replicates < 2 {
        return Err(Error::Config { field: "B".into(), reason: "need at least 2 replicates".into() });
    }
    let spectrum = cfg.decay.eigenvalues(cfg.p)?;
    let basis = haar_orthogonal(cfg.p, &mut StreamKey::new(cfg.seed).with("basis", cfg.p as u64).stream())?;
    let model = PopulationModel::new(spectrum, basis, cfg.generator)?;
    let mut estimates = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        let plan = DeltaPlan {
            n,
            k: cfg.k,
            datasets: cfg.datasets,
            replicates: cfg.replicates,
            held_out: cfg.held_out,
        };
        estimates.push(estimate_delta_n(&model, plan, &StreamKey::new(cfg.seed).with("rate-n", n as u64))?);
    }
    let points: Vec<(usize, f64)> = estimates.iter().map(|e| (e.n, e.delta_hat)).collect();
    let slope = match rate_slope(&points) {
        Ok(s) => Some(s),
        Err(Error::Insufficient(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(RateStudy { estimates, slope })
}
