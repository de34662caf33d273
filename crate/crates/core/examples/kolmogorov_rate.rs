//! Kolmogorov distance between bootstrap and sampling laws, and its decay
//! in n on a log-log scale.

use eigenboot::metrics::{pooled_kolmogorov_distance, rate_study, EcdfSampleSet, RateConfig};
use eigenboot::models::{DecayProfile, GeneratorFamily};
use nalgebra::DMatrix;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a = EcdfSampleSet::new(DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]))?;
    let b = EcdfSampleSet::new(DMatrix::from_column_slice(4, 1, &[0.0, 2.0, 2.0, 3.0]))?;
    println!("KS distance of two small samples: {}", pooled_kolmogorov_distance(&a, &b)?);

    let study = rate_study(&RateConfig {
        generator: GeneratorFamily::GaussianIid,
        decay: DecayProfile::Polynomial(1.3),
        p: 20,
        k: 2,
        n_grid: vec![100, 400, 1600],
        datasets: 100,
        replicates: 100,
        held_out: 3,
        seed: 8,
    })?;
    for e in &study.estimates {
        println!("n = {:>5}: Δ̂ = {:.3} (per held-out dataset {:?})", e.n, e.delta_hat, e.per_dataset);
    }
    println!("log-log slope: {:?}", study.slope);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
