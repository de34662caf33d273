//! Simultaneous intervals for λ₁..λ_k under the three transformation rules:
//! log with τ = 0, identity with τ = 1, and sqrt with τ chosen from the data.

use eigenboot::bootstrap::{replicate_eigenvalues, ReplicateScheme, Statistic, Transformation};
use eigenboot::intervals::{build_band, select_tau};
use eigenboot::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily};
use eigenboot::report::band_table;
use eigenboot::resample::StreamKey;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let key = StreamKey::new(5);
    let model = build_population(&DecayProfile::Polynomial(1.0), 50, GeneratorFamily::EllipticalExp, &mut key.with("basis", 0).stream())?;
    let data = sample_dataset(&model, 400, &mut key.with("data", 0).stream()).data;
    let reps = replicate_eigenvalues(&data, 5, 500, &ReplicateScheme::new(key.with("boot", 0)))?;
    let draws = reps.statistic(Statistic::Eigenvalues);
    let truth = model.spectrum.top(5)?;

    let log = build_band(&draws, Transformation::Log, 0.0, 0.05)?;
    let standardized = build_band(&draws, Transformation::Identity, 1.0, 0.05)?;
    let adaptive = select_tau(&draws, Transformation::sqrt(), 0.05)?;
    println!("tau scores: {:?}", adaptive.scores.iter().map(|s| s.map(|v| (v * 1e4).round() / 1e4)).collect::<Vec<_>>());
    for band in [&log, &standardized, &adaptive.band] {
        print!("{}", band_table(band));
        println!("covers truth: {}\n", band.covers(truth.values()));
        assert!(band.lower.iter().zip(&band.upper).all(|(l, u)| l <= u));
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
