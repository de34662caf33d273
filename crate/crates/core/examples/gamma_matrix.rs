//! The fourth-moment matrix Γ: closed forms against Monte Carlo.

use eigenboot::gamma::{analytic_gamma_elliptical, gamma_check};
use eigenboot::models::{GeneratorFamily, KurtosisSource};
use eigenboot::resample::StreamKey;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let g = analytic_gamma_elliptical(4, 32.0, 2)?;
    println!("elliptical, p = 4: Γ = {:?}, eigenvalues {:?}", g.entries().as_slice(), g.eigenvalues());

    for generator in [
        GeneratorFamily::GaussianIid,
        GeneratorFamily::EllipticalExp,
        GeneratorFamily::IidWithKurtosis(KurtosisSource::TwoPoint),
    ] {
        let check = gamma_check(generator, 5, 3, 50_000, &StreamKey::new(1))?;
        println!("{:<14} max |Γ̂ − Γ| = {:.4}", generator.name(), check.max_abs_error);
        for e in &check.entries {
            assert!(e.abs_error <= 5.0 * e.mc_se + 1e-9, "{e:?}");
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
