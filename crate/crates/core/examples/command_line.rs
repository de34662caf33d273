//! Driving the command-line interface in-process, with a JSON config file
//! whose settings are partly overridden by flags.

use clap::Parser;
use eigenboot::cli::{run, Cli};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("eigenboot-cli-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("run.json");
    std::fs::write(&config, r#"{"n": [100], "p": [10, 20], "k": 3, "trials": 10, "B": 50, "tau": "adaptive"}"#)?;
    let out = dir.join("coverage.csv");
    let args = ["eigenboot", "simulate", "--config", config.to_str().unwrap(), "--trials", "20", "--seed", "4", "--out", out.to_str().unwrap()];
    run(Cli::try_parse_from(args)?)?;
    let csv = std::fs::read_to_string(&out)?;
    print!("{csv}");
    assert_eq!(csv.lines().count(), 4);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
