//! Price file → biweekly log returns → eigenvalue and proportion bands.
//! Prices are simulated from a two-factor model so the example is
//! self-contained.

use std::fmt::Write as _;

use eigenboot::bootstrap::{replicate_eigenvalues, ReplicateScheme, Statistic, Transformation};
use eigenboot::ingest::{parse_prices, rank_by_volume, to_log_returns, DEFAULT_PERIOD};
use eigenboot::intervals::{band_for_mode, select_components, TauMode};
use eigenboot::resample::StreamKey;
use rand::Rng;
use rand_distr::StandardNormal;

fn synthetic_prices(days: usize, tickers: usize) -> String {
    let mut rng = StreamKey::new(99).stream();
    let mut csv = String::from("date,ticker,close,volume\n");
    let mut log_price = vec![4.0; tickers];
    for d in 0..days {
        let market: f64 = rng.sample::<f64, _>(StandardNormal) * 0.01;
        let sector: f64 = rng.sample::<f64, _>(StandardNormal) * 0.006;
        for (t, lp) in log_price.iter_mut().enumerate() {
            let beta = 0.5 + (t % 5) as f64 * 0.2;
            let own: f64 = rng.sample::<f64, _>(StandardNormal) * 0.004;
            *lp += beta * market + if t % 2 == 0 { sector } else { -sector } + own;
            let volume = 1000.0 * (tickers - t) as f64 + rng.random_range(0.0..10.0);
            writeln!(csv, "day{d:05},T{t:02},{:.6},{volume:.1}", lp.exp()).unwrap();
        }
    }
    csv
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let loaded = parse_prices(synthetic_prices(1181, 30).as_bytes())?;
    let table = loaded.table.select(&rank_by_volume(&loaded.table, 20)?)?;
    let returns = to_log_returns(&table, DEFAULT_PERIOD)?;
    println!("{} returns for {} tickers", returns.n(), returns.p());
    assert_eq!(returns.n(), 118);

    let scheme = ReplicateScheme::new(StreamKey::new(1).with("ci", 0)).centered(true);
    let reps = replicate_eigenvalues(&returns.values, 5, 500, &scheme)?;
    let eig = band_for_mode(&reps.statistic(Statistic::Eigenvalues), Transformation::sqrt(), TauMode::Adaptive, 0.05)?;
    let prop = band_for_mode(&reps.statistic(Statistic::Proportions), Transformation::sqrt(), TauMode::Adaptive, 0.05)?;
    for j in 0..5 {
        println!(
            "j = {}: λ in [{:.2e}, {:.2e}], π in [{:.3}, {:.3}]",
            j + 1,
            eig.lower[j],
            eig.upper[j],
            prop.lower[j],
            prop.upper[j]
        );
    }
    println!("components for 70% of variance: {:?}", select_components(&prop, 0.7));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
