//! CSV writers for every output table. Each file starts with a
//! `# schema_version: N` line followed by a header row.

use std::io::Write;

use crate::bench::{BenchRow, CostFit};
use crate::error::Result;
use crate::gamma::GammaCheck;
use crate::intervals::ConfidenceBand;
use crate::metrics::{DeltaEstimate, ExperimentRecord};

pub const SCHEMA_VERSION: u32 = 1;

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        trim_zeros(format!("{x:.*}", (5 - exp) as usize))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn writer<W: Write>(mut out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    writeln!(out, "# schema_version: {SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// One row per [`ExperimentRecord`].
pub fn write_records<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = writer(
        out,
        &[
            "model", "decay_kind", "decay_param", "n", "p", "k", "transform", "tau_mode", "alpha", "trials", "B",
            "coverage", "avg_width", "width_sd", "coverage_se", "seed", "statistic", "failures",
        ],
    )?;
    for r in records {
        w.write_record([
            r.model.clone(),
            r.decay_kind.clone(),
            fmt_sig6(r.decay_param),
            r.n.to_string(),
            r.p.to_string(),
            r.k.to_string(),
            r.transform.to_string(),
            r.tau_mode.to_string(),
            fmt_sig6(r.alpha),
            r.trials.to_string(),
            r.b.to_string(),
            fmt_sig6(r.coverage),
            fmt_sig6(r.avg_width),
            fmt_sig6(r.width_sd),
            fmt_sig6(r.coverage_se),
            r.seed.to_string(),
            r.statistic.to_string(),
            r.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Interval rows `j,point,lower,upper,…` for one or more bands; values keep
/// full precision.
pub fn write_bands<W: Write>(bands: &[&ConfidenceBand], out: W) -> Result<()> {
    let mut w = writer(out, &["j", "point", "lower", "upper", "transform", "tau", "alpha", "statistic"])?;
    for band in bands {
        for j in 0..band.k() {
            w.write_record([
                (j + 1).to_string(),
                band.point[j].to_string(),
                band.lower[j].to_string(),
                band.upper[j].to_string(),
                band.transform.to_string(),
                band.tau.to_string(),
                band.alpha.to_string(),
                band.statistic.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_deltas<W: Write>(estimates: &[DeltaEstimate], seed: u64, out: W) -> Result<()> {
    let mut w = writer(
        out,
        &["n", "p", "k", "grid_size", "delta_hat", "datasets", "replicates", "held_out", "seed"],
    )?;
    for e in estimates {
        w.write_record([
            e.n.to_string(),
            e.p.to_string(),
            e.k.to_string(),
            e.grid_size.to_string(),
            fmt_sig6(e.delta_hat),
            e.datasets.to_string(),
            e.replicates.to_string(),
            e.per_dataset.len().to_string(),
            seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_gamma<W: Write>(check: &GammaCheck, out: W) -> Result<()> {
    let mut w = writer(
        out,
        &["generator", "p", "n_mc", "row", "col", "analytic", "empirical", "abs_error", "mc_se"],
    )?;
    for e in &check.entries {
        w.write_record([
            check.generator.name().to_string(),
            check.p.to_string(),
            check.n_mc.to_string(),
            e.row.to_string(),
            e.col.to_string(),
            fmt_sig6(e.analytic),
            fmt_sig6(e.empirical),
            fmt_sig6(e.abs_error),
            fmt_sig6(e.mc_se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bench<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = writer(out, &["n", "p", "k", "B", "route", "mean_secs", "checksum"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.p.to_string(),
            r.k.to_string(),
            r.b.to_string(),
            r.route.to_string(),
            fmt_sig6(r.mean_secs),
            r.checksum.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width table of one band for terminals.
pub fn band_table(band: &ConfidenceBand) -> String {
    let mut s = format!(
        "{} ({}, tau = {}, alpha = {})\n{:>4} {:>14} {:>14} {:>14}\n",
        band.statistic, band.transform, band.tau, band.alpha, "j", "lower", "point", "upper"
    );
    for j in 0..band.k() {
        s.push_str(&format!(
            "{:>4} {:>14.6e} {:>14.6e} {:>14.6e}\n",
            j + 1,
            band.lower[j],
            band.point[j],
            band.upper[j]
        ));
    }
    s
}

pub fn fit_summary(fit: &CostFit) -> String {
    format!(
        "cost model t = c1*n*ln(n) + c2*n*p*k: c1 = {:.3e}, c2 = {:.3e}, R^2 = {:.4}",
        fit.resample_coef, fit.eigen_coef, fit.r_squared
    )
}
