//! Timing harness for the per-replicate cost of the bootstrap engine.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::bootstrap::{ReplicateEngine, ReplicateScheme};
use crate::error::{arg, Result};
use crate::linalg::FactorRoute;
use crate::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily};
use crate::resample::StreamKey;

/// Mean wall time per replicate for one `(n, p, k)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub b: usize,
    pub route: FactorRoute,
    pub mean_secs: f64,
    /// Sum of the top-k values over all replicates, for checking that timing
    /// runs compute the same numbers as ordinary runs.
    pub checksum: f64,
}

/// Times `b` replicates on the calling thread, on data from the elliptical
/// model with polynomial decay γ = 1.
pub fn time_replicates(n: usize, p: usize, k: usize, b: usize, route: FactorRoute, seed: u64) -> Result<BenchRow> {
    if b == 0 {
        return Err(arg("B", "need at least one replicate"));
    }
    let key = StreamKey::new(seed).with("bench-n", n as u64).with("bench-p", p as u64);
    let model = build_population(
        &DecayProfile::Polynomial(1.0),
        p,
        GeneratorFamily::EllipticalExp,
        &mut key.with("basis", 0).stream(),
    )?;
    let data = sample_dataset(&model, n, &mut key.with("data", 0).stream()).data;
    let scheme = ReplicateScheme::new(key.with("boot", 0)).route(route);
    let engine = ReplicateEngine::new(&data, k, &scheme)?;
    // one untimed replicate to fault in allocations
    engine.replicate(&scheme.key.with("warmup", 0))?;
    let start = Instant::now();
    let mut checksum = 0.0;
    for r in 0..b {
        let (vals, _) = engine.replicate(&scheme.key.with("rep", r as u64))?;
        checksum += vals.iter().sum::<f64>();
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(BenchRow {
        n,
        p,
        k,
        b,
        route,
        mean_secs: elapsed / b as f64,
        checksum,
    })
}

/// Least-squares fit `t ≈ c₁·n·ln n + c₂·n·p·k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostFit {
    pub resample_coef: f64,
    pub eigen_coef: f64,
    pub r_squared: f64,
}

pub fn fit_cost_model(rows: &[BenchRow]) -> Result<CostFit> {
    if rows.len() < 2 {
        return Err(arg("rows", "need at least two timing rows to fit"));
    }
    let design = DMatrix::from_fn(rows.len(), 2, |i, j| {
        let r = &rows[i];
        let n = r.n as f64;
        if j == 0 {
            n * n.ln().max(1.0)
        } else {
            n * r.p as f64 * r.k as f64
        }
    });
    let t = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.mean_secs));
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&t, 1e-18)
        .map_err(|e| arg("rows", e.to_string()))?;
    let fitted = &design * &coef;
    let mean = t.mean();
    let ss_tot: f64 = t.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = t.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(CostFit {
        resample_coef: coef[0],
        eigen_coef: coef[1],
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
    })
}
