//! Sample covariance, its leading eigenvalues, effective rank, and a
//! numerical check of Wielandt's inequality on a random covariance.

use eigenboot::linalg::{
    effective_rank, sample_covariance, top_eigenvalues, top_eigenvalues_of_data, wielandt_check,
    CovarianceMatrix, EigenRoute, WielandtReport,
};
use eigenboot::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily};
use eigenboot::resample::StreamKey;
use nalgebra::DMatrix;
use rand::Rng;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let key = StreamKey::new(7);
    let model = build_population(
        &DecayProfile::Polynomial(1.0),
        40,
        GeneratorFamily::GaussianIid,
        &mut key.with("basis", 0).stream(),
    )?;
    let data = sample_dataset(&model, 200, &mut key.with("data", 0).stream()).data;

    let cov = sample_covariance(&data, false)?;
    let top = top_eigenvalues(&cov, 5)?;
    let via_svd = top_eigenvalues_of_data(&data, 5, EigenRoute::Svd)?;
    for (a, b) in top.values().iter().zip(via_svd.values()) {
        assert!((a - b).abs() <= 1e-9 * top.largest());
    }
    println!("top 5 sample eigenvalues: {:?}", top.values());
    println!("true top 5:               {:?}", model.spectrum.top(5)?.values());
    println!("effective rank: sample {:.3}, population {:.3}", effective_rank(&cov.spectrum()?)?, effective_rank(&model.spectrum)?);

    // a diagonal matrix with a clear top-3 block plus a small symmetric perturbation
    let mut rng = key.with("wielandt", 0).stream();
    let noise = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-0.2..0.2));
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![9.0, 8.0, 7.0, 1.0, 0.5, 0.2]));
    let a = CovarianceMatrix::new(d + (&noise + noise.transpose()) * 0.5)?;
    match wielandt_check(&a, 3)? {
        WielandtReport::Applicable { pairs, holds } => {
            assert!(holds);
            for (j, (gap, bound)) in pairs.iter().enumerate() {
                println!("j = {}: 0 <= {gap:.4} <= {bound:.4}", j + 1);
            }
        }
        WielandtReport::NotApplicable => println!("blocks overlap; the bound does not apply"),
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
