//! Bootstrap replicates of the leading eigenvalues. Every replicate has its
//! own random stream, so results are identical for any number of threads.

use eigenboot::bootstrap::{replicate_eigenvalues, sigma_hat, ReplicateScheme, Statistic, Transformation};
use eigenboot::linalg::FactorRoute;
use eigenboot::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily};
use eigenboot::resample::{resample_indices, StreamKey};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let key = StreamKey::new(3);
    let model = build_population(&DecayProfile::Polynomial(1.3), 60, GeneratorFamily::GaussianIid, &mut key.with("basis", 0).stream())?;
    let data = sample_dataset(&model, 300, &mut key.with("data", 0).stream()).data;

    let draw = resample_indices(10, &mut key.with("demo", 0).stream());
    println!("one resample of 10 rows: {:?}", draw.indices);

    let scheme = ReplicateScheme::new(key.with("boot", 0));
    let reps = replicate_eigenvalues(&data, 3, 200, &scheme)?;
    println!("λ̂ = {:?}", reps.lam_hat.values());
    println!("first replicate: {:?}", reps.reps.row(0).iter().collect::<Vec<_>>());
    let sd = sigma_hat(&reps.statistic(Statistic::Eigenvalues), Transformation::Identity)?;
    println!("bootstrap sd: {:?}", sd.values);

    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let again = single.install(|| replicate_eigenvalues(&data, 3, 200, &scheme))?;
    assert_eq!(reps.reps, again.reps);

    // the subspace route reaches the same values as a dense solve
    let fast = replicate_eigenvalues(&data, 3, 20, &scheme.clone().route(FactorRoute::Subspace))?;
    let dense = replicate_eigenvalues(&data, 3, 20, &scheme.route(FactorRoute::Covariance))?;
    assert!((fast.reps - dense.reps).amax() < 1e-6);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
