//! Per-replicate cost of the bootstrap engine and its scaling in p.

use eigenboot::bench::{fit_cost_model, time_replicates};
use eigenboot::linalg::FactorRoute;
use eigenboot::report::fit_summary;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut rows = Vec::new();
    for p in [50, 100, 200] {
        let row = time_replicates(500, p, 5, 50, FactorRoute::Subspace, 0)?;
        println!("n = 500, p = {p:>3}, k = 5: {:.2e} s per replicate", row.mean_secs);
        rows.push(row);
    }
    println!("{}", fit_summary(&fit_cost_model(&rows)?));
    println!("time(p = 200) / time(p = 50) = {:.2}", rows[2].mean_secs / rows[0].mean_secs);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
