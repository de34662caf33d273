//! Bands for the explained-variance proportions π_j = (λ₁+…+λ_j)/tr Σ̂ and
//! the smallest j whose lower bound clears a threshold.

use eigenboot::bootstrap::{ReplicateScheme, Transformation};
use eigenboot::intervals::{proportion_band, select_components, TauMode};
use eigenboot::linalg::OrthogonalBasis;
use eigenboot::models::{sample_dataset, GeneratorFamily, PopulationModel};
use eigenboot::linalg::Spectrum;
use eigenboot::resample::StreamKey;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // three spikes on a flat bulk: π₃ ≈ 0.6
    let mut values = vec![6.0, 4.0, 2.0];
    values.extend(std::iter::repeat_n(0.2, 40));
    let model = PopulationModel::new(Spectrum::new(values)?, OrthogonalBasis::identity(43), GeneratorFamily::GaussianIid)?;
    let key = StreamKey::new(21);
    let data = sample_dataset(&model, 500, &mut key.with("data", 0).stream()).data;

    let scheme = ReplicateScheme::new(key.with("boot", 0)).centered(true);
    let band = proportion_band(&data, 5, 400, Transformation::sqrt(), TauMode::Adaptive, 0.05, &scheme)?;
    for j in 0..band.k() {
        println!("π_{}: {:.3} in [{:.3}, {:.3}]", j + 1, band.point[j], band.lower[j], band.upper[j]);
    }
    let chosen = select_components(&band, 0.5);
    println!("components needed to explain more than 50%: {chosen:?}");
    assert_eq!(chosen, Some(3));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
