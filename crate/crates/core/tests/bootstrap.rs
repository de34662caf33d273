use eigenboot::bootstrap::{
    empirical_quantile, max_min_stats, replicate_eigenvalues, sigma_hat, ReplicateScheme, Statistic,
    Transformation,
};
use eigenboot::linalg::top_eigenvalues_of_data;
use eigenboot::linalg::EigenRoute;
use eigenboot::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily};
use eigenboot::resample::StreamKey;
use nalgebra::DMatrix;

fn dataset(seed: u64, n: usize, p: usize, gamma: f64) -> DMatrix<f64> {
    let key = StreamKey::new(seed);
    let model = build_population(
        &DecayProfile::Polynomial(gamma),
        p,
        GeneratorFamily::EllipticalExp,
        &mut key.with("basis", 0).stream(),
    )
    .unwrap();
    sample_dataset(&model, n, &mut key.with("data", 0).stream()).data
}

#[test]
fn singleton_dataset_gives_identical_replicates() {
    let x = DMatrix::from_row_slice(1, 3, &[1.0, -2.0, 0.5]);
    let reps = replicate_eigenvalues(&x, 1, 20, &ReplicateScheme::new(StreamKey::new(1))).unwrap();
    let norm2 = 1.0 + 4.0 + 0.25;
    assert!(reps.reps.iter().all(|&v| (v - norm2).abs() < 1e-12));
    assert!((reps.lam_hat.values()[0] - norm2).abs() < 1e-12);
}

#[test]
fn two_orthogonal_rows_enumeration() {
    // resamples {1,1}, {2,2} give ‖x‖², resamples {1,2}, {2,1} give ‖x‖²/2
    let x = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 3.0]);
    let reps = replicate_eigenvalues(&x, 1, 4000, &ReplicateScheme::new(StreamKey::new(2))).unwrap();
    let mut full = 0;
    for &v in reps.reps.iter() {
        if (v - 9.0).abs() < 1e-9 {
            full += 1;
        } else {
            assert!((v - 4.5).abs() < 1e-9, "unexpected replicate value {v}");
        }
    }
    let freq = full as f64 / 4000.0;
    assert!((freq - 0.5).abs() <= 0.05, "frequency {freq}");
}

#[test]
fn replicates_do_not_depend_on_worker_count() {
    let data = dataset(3, 120, 30, 1.0);
    let scheme = ReplicateScheme::new(StreamKey::new(3).with("boot", 0));
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| replicate_eigenvalues(&data, 4, 50, &scheme).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.reps, four.reps);
    assert_eq!(one.traces, four.traces);
}

#[test]
fn identity_statistics_scale_with_the_data() {
    for (seed, s) in [(4u64, 2.0f64), (5, 0.37), (6, 13.0)] {
        let data = dataset(seed, 80, 20, 1.0);
        let scheme = ReplicateScheme::new(StreamKey::new(seed).with("boot", 0));
        let base = replicate_eigenvalues(&data, 3, 60, &scheme).unwrap();
        let scaled = replicate_eigenvalues(&(&data * s), 3, 60, &scheme).unwrap();
        let s2 = s * s;
        let tol = if s == 2.0 { 0.0 } else { 1e-12 };
        for (a, b) in base.reps.iter().zip(scaled.reps.iter()) {
            assert!((b - s2 * a).abs() <= tol * b.abs(), "{a} {b}");
        }
        for (a, b) in base.lam_hat.values().iter().zip(scaled.lam_hat.values()) {
            assert!((b - s2 * a).abs() <= tol.max(1e-14) * b.abs());
        }
        let h = Transformation::Identity;
        let d0 = base.statistic(Statistic::Eigenvalues);
        let d1 = scaled.statistic(Statistic::Eigenvalues);
        let m0 = max_min_stats(&d0, h, &sigma_hat(&d0, h).unwrap(), 0.0).unwrap();
        let m1 = max_min_stats(&d1, h, &sigma_hat(&d1, h).unwrap(), 0.0).unwrap();
        for (a, b) in m0.max.iter().chain(&m0.min).zip(m1.max.iter().chain(&m1.min)) {
            assert!((b - s2 * a).abs() <= 1e-12 * (b.abs() + s2 * 1e-3), "{a} {b}");
        }
    }
}

#[test]
fn fully_standardized_power_statistics_are_scale_free() {
    for (seed, a, s) in [(7u64, 0.5, 3.0), (8, 0.3, 0.1), (9, 0.8, 25.0)] {
        let data = dataset(seed, 100, 15, 1.3);
        let scheme = ReplicateScheme::new(StreamKey::new(seed).with("boot", 0));
        let h = Transformation::Power(a);
        let m = |d: &DMatrix<f64>| {
            let draws = replicate_eigenvalues(d, 4, 80, &scheme).unwrap().statistic(Statistic::Eigenvalues);
            max_min_stats(&draws, h, &sigma_hat(&draws, h).unwrap(), 1.0).unwrap()
        };
        let (m0, m1) = (m(&data), m(&(&data * s)));
        for (x, y) in m0.max.iter().zip(&m1.max) {
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-3), "{x} {y}");
        }
    }
}

#[test]
fn min_statistic_never_exceeds_max_statistic() {
    for seed in 10..16u64 {
        let data = dataset(seed, 60, 12, 0.7);
        let draws = replicate_eigenvalues(&data, 4, 100, &ReplicateScheme::new(StreamKey::new(seed)))
            .unwrap()
            .statistic(Statistic::Eigenvalues);
        for h in [Transformation::Log, Transformation::sqrt(), Transformation::Identity] {
            let sig = sigma_hat(&draws, h).unwrap();
            for tau in [0.0, 0.5, 1.0] {
                let mm = max_min_stats(&draws, h, &sig, tau).unwrap();
                assert!(mm.min.iter().zip(&mm.max).all(|(l, m)| l <= m));
                for alpha in [0.01, 0.05, 0.2, 0.5, 0.9, 1.0] {
                    let ql = empirical_quantile(&mm.min, (alpha / 2.0f64).max(1e-9)).unwrap();
                    let qm = empirical_quantile(&mm.max, (1.0 - alpha / 2.0).min(1.0 - 1e-9)).unwrap();
                    assert!(ql <= qm);
                }
            }
        }
    }
}

#[test]
fn bootstrap_scale_matches_sampling_spread() {
    // Gaussian, Σ = diag(1, 1/2): both quantities estimate √(λ₁²Γ₁₁) = √2
    let (n, p) = (2000, 2);
    let key = StreamKey::new(17);
    let model = build_population(&DecayProfile::Polynomial(1.0), p, GeneratorFamily::GaussianIid, &mut key.with("basis", 0).stream())
        .unwrap();
    let root_n = (n as f64).sqrt();
    let devs: Vec<f64> = (0..2000u64)
        .map(|m| {
            let data = sample_dataset(&model, n, &mut key.with("mc", m).stream()).data;
            root_n * (top_eigenvalues_of_data(&data, 1, EigenRoute::Auto).unwrap().values()[0] - 1.0)
        })
        .collect();
    let mean = devs.iter().sum::<f64>() / devs.len() as f64;
    let sd = (devs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (devs.len() - 1) as f64).sqrt();

    let mut boot: Vec<f64> = (0..5u64)
        .map(|r| {
            let data = sample_dataset(&model, n, &mut key.with("held", r).stream()).data;
            let draws = replicate_eigenvalues(&data, 1, 2000, &ReplicateScheme::new(key.with("boot", r)))
                .unwrap()
                .statistic(Statistic::Eigenvalues);
            root_n * sigma_hat(&draws, Transformation::Identity).unwrap().values[0]
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let typical = boot[2];
    assert!((typical / sd - 1.0).abs() <= 0.15, "sampling sd {sd:.3}, bootstrap {typical:.3}");
    assert!((sd / 2f64.sqrt() - 1.0).abs() <= 0.15, "sampling sd {sd:.3}");
}
