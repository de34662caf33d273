//! A small coverage experiment written as CSV.

use eigenboot::bootstrap::{Statistic, Transformation};
use eigenboot::intervals::TauMode;
use eigenboot::linalg::FactorRoute;
use eigenboot::metrics::{coverage_experiment, CoverageConfig};
use eigenboot::models::{DecayProfile, GeneratorFamily};
use eigenboot::report::write_records;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = CoverageConfig {
        generator: GeneratorFamily::GaussianIid,
        decay: DecayProfile::Polynomial(1.3),
        n_grid: vec![100, 200],
        p_grid: vec![10, 40],
        k: 3,
        statistic: Statistic::Eigenvalues,
        transform: Transformation::sqrt(),
        tau: TauMode::Adaptive,
        alpha: 0.05,
        trials: 40,
        b: 100,
        seed: 2024,
        route: FactorRoute::Auto,
    };
    let records = coverage_experiment(&cfg)?;
    assert_eq!(records.len(), 4);
    write_records(&records, std::io::stdout().lock())?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
