use std::path::Path;
use std::process::{Command, Output};

use eigenboot::ingest::write_matrix_csv;
use eigenboot::intervals::select_components;
use eigenboot::models::{build_population, sample_dataset, DecayProfile, GeneratorFamily};
use eigenboot::resample::StreamKey;

fn eigenboot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigenboot"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// CSV body without the schema comment and header.
fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn write_dataset(path: &Path, generator: GeneratorFamily, spikes: &[f64], p: usize, n: usize) {
    let key = StreamKey::new(5);
    let model = if spikes.is_empty() {
        build_population(&DecayProfile::Polynomial(1.0), p, generator, &mut key.with("basis", 0).stream()).unwrap()
    } else {
        let profile = DecayProfile::CustomLeading {
            leading: spikes.to_vec(),
            tail: eigenboot::models::TailRule::Polynomial(1.0),
        };
        build_population(&profile, p, generator, &mut key.with("basis", 0).stream()).unwrap()
    };
    let data = sample_dataset(&model, n, &mut key.with("data", 0).stream()).data;
    let names: Vec<String> = (1..=p).map(|j| format!("v{j}")).collect();
    write_matrix_csv(&names, &data, std::fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn simulate_smoke_writes_one_row() {
    let o = eigenboot(&["simulate", "--n", "100", "--p", "10", "--trials", "20", "-B", "50", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# schema_version: 1\n"));
    assert_eq!(data_rows(&out).len(), 1);
}

#[test]
fn simulate_grid_is_a_product() {
    let o = eigenboot(&["simulate", "--n", "50,80", "--p", "6,9", "--k", "2", "--trials", "5", "-B", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&stdout(&o)).len(), 4);
}

#[test]
fn invalid_config_fails_naming_the_field() {
    let o = eigenboot(&["simulate", "--decay", "exponential", "--parameter", "1.5"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("delta"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"trials": 0}"#).unwrap();
    let o = eigenboot(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("trials"));

    std::fs::write(&cfg, r#"{"trails": 3}"#).unwrap();
    assert!(!eigenboot(&["simulate", "--config", cfg.to_str().unwrap()]).status.success());
}

#[test]
fn zero_gap_is_allowed_with_a_warning() {
    let o = eigenboot(&["simulate", "--decay", "gap", "--parameter", "0", "--p", "8", "--n", "60", "--k", "2", "--trials", "3", "-B", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("gap parameter 0"), "{}", stderr(&o));
}

#[test]
fn help_lists_flags_and_unknown_flags_fail() {
    let o = eigenboot(&["simulate", "--help"]);
    let help = stdout(&o);
    for flag in ["--seed", "--workers", "--out", "--config", "--trials", "--tau", "--replicates"] {
        assert!(help.contains(flag), "missing {flag}");
    }
    let top = stdout(&eigenboot(&["--help"]));
    for sub in ["simulate", "ci", "rates", "gamma-check", "bench"] {
        assert!(top.contains(sub));
    }
    assert!(!eigenboot(&["simulate", "--no-such-flag"]).status.success());
}

#[test]
fn output_is_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str| {
        let out = dir.path().join(format!("w{workers}.csv"));
        let o = eigenboot(&[
            "simulate", "--n", "80", "--p", "12", "--k", "3", "--trials", "16", "-B", "40", "--seed", "9",
            "--workers", workers, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn ci_on_a_gaussian_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_dataset(&input, GeneratorFamily::GaussianIid, &[], 20, 150);
    let out = dir.path().join("bands.csv");
    let o = eigenboot(&["ci", "--input", input.to_str().unwrap(), "--k", "5", "-B", "200", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 5);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        let (lo, hi): (f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        assert!(lo <= hi);
    }
    assert!(stdout(&o).contains("eigenvalues"));
}

#[test]
fn ci_threshold_matches_select_components() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("spiked.csv");
    write_dataset(&input, GeneratorFamily::GaussianIid, &[30.0, 20.0, 10.0], 30, 300);
    let out = dir.path().join("bands.csv");
    let o = eigenboot(&[
        "ci", "--input", input.to_str().unwrap(), "--k", "4", "-B", "300", "--proportions", "--threshold", "0.4",
        "--seed", "3", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lower: Vec<f64> = data_rows(&csv)
        .into_iter()
        .filter(|r| r.ends_with("proportions"))
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(lower.len(), 4);
    let band = eigenboot::intervals::ConfidenceBand {
        upper: vec![1.0; 4],
        point: vec![0.5; 4],
        lower,
        transform: eigenboot::bootstrap::Transformation::sqrt(),
        tau: 0.0,
        alpha: 0.05,
        statistic: eigenboot::bootstrap::Statistic::Proportions,
    };
    let expected = select_components(&band, 0.4).expect("spiked data clears 0.4");
    assert!(stdout(&o).contains(&format!("selected components: {expected}")), "{}", stdout(&o));
}

#[test]
fn ci_rejects_k_above_rank() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("small.csv");
    write_dataset(&input, GeneratorFamily::GaussianIid, &[], 6, 4);
    let o = eigenboot(&["ci", "--input", input.to_str().unwrap(), "--k", "5", "-B", "50"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`k`"), "{}", stderr(&o));
}

#[test]
fn ci_reads_price_files() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    let mut text = String::from("date,ticker,close,volume\n");
    let mut rng = StreamKey::new(6).stream();
    for t in 0..8 {
        let mut price = 50.0;
        for d in 0..211 {
            price *= rand::Rng::random_range(&mut rng, -0.02..0.02f64).exp();
            if !(t == 7 && d == 100) {
                text.push_str(&format!("d{d:04},S{t},{price},{}\n", 100 * (t + 1)));
            }
        }
    }
    std::fs::write(&prices, text).unwrap();
    let o = eigenboot(&["ci", "--prices", prices.to_str().unwrap(), "--top", "5", "--k", "2", "-B", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("S7"));
    assert!(stderr(&o).contains("n = 21, p = 5"), "{}", stderr(&o));
}

#[test]
fn rates_smoke_and_validation() {
    let args = ["rates", "--n", "100,400", "--p", "10", "--k", "2", "-M", "30", "-B", "30", "-R", "1", "--seed", "2"];
    let o = eigenboot(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(data_rows(&stdout(&o)).len(), 2);
    assert!(stderr(&o).contains("rate slope"));
    assert_eq!(stdout(&eigenboot(&args)), stdout(&o));

    let o = eigenboot(&["rates", "--n", "100,100,400", "--p", "10", "-M", "10", "-B", "10", "-R", "1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`n`"));

    let o = eigenboot(&["rates", "--n", "100,200,400", "--p", "8", "--k", "1", "-M", "20", "-B", "20", "-R", "1"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("rate slope: "));
}

#[test]
fn gamma_check_reports_errors() {
    let o = eigenboot(&["gamma-check", "--model", "gaussian", "--p", "3", "--k", "3", "--n-mc", "100000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(data_rows(&csv).len(), 6);
    let max_err: f64 = stderr(&o).trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(max_err < 0.1);

    let o = eigenboot(&["gamma-check", "--model", "elliptical", "--p", "4", "--k", "2", "--n-mc", "50000"]);
    assert!(o.status.success());
    let first = data_rows(&stdout(&o))[0].to_string();
    assert!(first.contains(",3,"), "{first}"); // a + b = 8/3 + 1/3

    let o = eigenboot(&["gamma-check", "--p", "3", "--k", "4"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("`k`"));
}

#[test]
fn bench_reports_timings_and_fit() {
    let o = eigenboot(&["bench", "--n", "200", "--p", "20,40", "--k", "3", "-B", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 2);
    for r in rows {
        let secs: f64 = r.split(',').nth(5).unwrap().parse().unwrap();
        assert!(secs > 0.0);
    }
    assert!(stderr(&o).contains("cost model"));
}
