//! Decay profiles and generator families, and data drawn from them.

use eigenboot::linalg::sample_covariance;
use eigenboot::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily, KurtosisSource};
use eigenboot::resample::StreamKey;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = 8;
    for profile in [
        DecayProfile::Polynomial(1.3),
        DecayProfile::Exponential(0.7),
        DecayProfile::gap(0.2)?,
    ] {
        let values = profile.eigenvalues(p)?;
        println!("{profile:<18} {:?}", values.values().iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>());
    }

    let key = StreamKey::new(11);
    for generator in [
        GeneratorFamily::GaussianIid,
        GeneratorFamily::EllipticalExp,
        GeneratorFamily::IidWithKurtosis(KurtosisSource::ScaledUniform),
    ] {
        let model = build_population(&DecayProfile::Polynomial(1.0), p, generator, &mut key.with("basis", 0).stream())?;
        let data = sample_dataset(&model, 20_000, &mut key.with("data", 0).stream()).data;
        let cov = sample_covariance(&data, false)?;
        let err = (cov.as_matrix() - model.covariance()).amax();
        println!("{:<12} max |Σ̂ − Σ| at n = 20000: {err:.4}", generator.name());
        assert!(err < 0.1);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
