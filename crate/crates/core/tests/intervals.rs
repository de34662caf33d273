use eigenboot::bootstrap::{replicate_eigenvalues, ReplicateScheme, Statistic, Transformation};
use eigenboot::intervals::{build_band, proportion_band, select_tau, TauMode};
use eigenboot::linalg::FactorRoute;
use eigenboot::metrics::{coverage_experiment, CoverageConfig};
use eigenboot::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily};
use eigenboot::resample::StreamKey;
use nalgebra::DMatrix;

fn draws_for(data: &DMatrix<f64>, k: usize, b: usize, seed: u64) -> eigenboot::bootstrap::StatisticDraws {
    replicate_eigenvalues(data, k, b, &ReplicateScheme::new(StreamKey::new(seed)))
        .unwrap()
        .statistic(Statistic::Eigenvalues)
}

fn dataset(seed: u64, n: usize, p: usize) -> DMatrix<f64> {
    let key = StreamKey::new(seed);
    let model = build_population(&DecayProfile::Polynomial(0.8), p, GeneratorFamily::GaussianIid, &mut key.with("basis", 0).stream())
        .unwrap();
    sample_dataset(&model, n, &mut key.with("data", 0).stream()).data
}

#[test]
fn bands_are_ordered_on_random_instances() {
    for seed in 0..8u64 {
        let data = dataset(seed, 40 + 10 * seed as usize, 25);
        let draws = draws_for(&data, 5, 80, seed);
        for h in [Transformation::Log, Transformation::sqrt(), Transformation::Identity, Transformation::Power(0.25)] {
            for tau in [0.0, 0.4, 1.0] {
                let band = build_band(&draws, h, tau, 0.1).unwrap();
                assert!(band.lower.iter().zip(&band.upper).all(|(l, u)| l <= u), "{h} {tau}");
            }
            let sel = select_tau(&draws, h, 0.1).unwrap();
            assert!(sel.grid.contains(&sel.chosen));
        }
    }
}

#[test]
fn identity_band_scales_with_the_data() {
    let data = dataset(20, 60, 10);
    let s = 1.7;
    let b0 = build_band(&draws_for(&data, 3, 100, 1), Transformation::Identity, 0.0, 0.05).unwrap();
    let b1 = build_band(&draws_for(&(&data * s), 3, 100, 1), Transformation::Identity, 0.0, 0.05).unwrap();
    for (x, y) in b0.lower.iter().chain(&b0.upper).zip(b1.lower.iter().chain(&b1.upper)) {
        assert!((y - s * s * x).abs() <= 1e-12 * y.abs().max(1e-12), "{x} {y}");
    }
}

#[test]
fn power_tau_choice_is_scale_invariant() {
    for seed in 30..34u64 {
        let data = dataset(seed, 80, 20);
        let a = select_tau(&draws_for(&data, 4, 120, seed), Transformation::sqrt(), 0.05).unwrap();
        let b = select_tau(&draws_for(&(&data * 6.0), 4, 120, seed), Transformation::sqrt(), 0.05).unwrap();
        assert_eq!(a.chosen, b.chosen);
    }
}

#[test]
fn proportion_band_edge_cases() {
    let scheme = ReplicateScheme::new(StreamKey::new(40));
    let h = Transformation::Identity;
    let fixed = TauMode::Fixed(0.0);

    // p = k = 1: π₁ ≡ 1
    let data = DMatrix::from_column_slice(5, 1, &[1.0, -2.0, 0.5, 3.0, 1.5]);
    let band = proportion_band(&data, 1, 50, h, fixed, 0.05, &scheme).unwrap();
    assert_eq!((band.lower[0], band.upper[0]), (1.0, 1.0));

    // p = k = 3: the last proportion is always 1, so its interval reaches 1
    let data = dataset(41, 30, 3);
    let band = proportion_band(&data, 3, 80, h, fixed, 0.05, &scheme).unwrap();
    assert_eq!(band.upper[2], 1.0);
    assert!(band.lower.iter().zip(&band.upper).all(|(l, u)| 0.0 <= *l && l <= u && *u <= 1.0));

    // rank-one data: π₁ ≡ 1 in every replicate
    let dir = [0.6, 0.0, -0.8];
    let data = DMatrix::from_fn(12, 3, |i, j| (i as f64 - 5.5) * dir[j]);
    let band = proportion_band(&data, 1, 50, h, fixed, 0.05, &scheme).unwrap();
    assert!((band.lower[0] - 1.0).abs() < 1e-12 && band.upper[0] == 1.0);

    // one observation: every replicate equals the data
    let data = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 0.0, -1.0]);
    let band = proportion_band(&data, 1, 20, h, fixed, 0.05, &scheme).unwrap();
    assert_eq!((band.lower[0], band.upper[0]), (1.0, 1.0));
}

#[test]
fn fixed_tau_falls_back_when_scale_vanishes() {
    let data = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 0.0, -1.0]);
    let band = proportion_band(&data, 1, 20, Transformation::Identity, TauMode::Fixed(1.0), 0.05, &ReplicateScheme::new(StreamKey::new(2)))
        .unwrap();
    assert_eq!(band.tau, 0.0);
}

#[test]
fn log_band_has_nominal_coverage_in_the_classical_regime() {
    let cfg = CoverageConfig {
        generator: GeneratorFamily::GaussianIid,
        decay: DecayProfile::Polynomial(1.0),
        n_grid: vec![2000],
        p_grid: vec![2],
        k: 1,
        statistic: Statistic::Eigenvalues,
        transform: Transformation::Log,
        tau: TauMode::Fixed(0.0),
        alpha: 0.05,
        trials: 500,
        b: 500,
        seed: 77,
        route: FactorRoute::Auto,
    };
    let r = &coverage_experiment(&cfg).unwrap()[0];
    assert_eq!(r.failures, 0);
    assert!((0.91..=0.98).contains(&r.coverage), "coverage {}", r.coverage);
}
