#[allow(dead_code)]
#[path = "../examples/covariance_spectrum.rs"]
mod covariance_spectrum;
#[allow(dead_code)]
#[path = "../examples/population_models.rs"]
mod population_models;
#[allow(dead_code)]
#[path = "../examples/bootstrap_replicates.rs"]
mod bootstrap_replicates;
#[allow(dead_code)]
#[path = "../examples/confidence_band.rs"]
mod confidence_band;
#[allow(dead_code)]
#[path = "../examples/explained_variance.rs"]
mod explained_variance;
#[allow(dead_code)]
#[path = "../examples/gamma_matrix.rs"]
mod gamma_matrix;
#[allow(dead_code)]
#[path = "../examples/coverage_study.rs"]
mod coverage_study;
#[allow(dead_code)]
#[path = "../examples/kolmogorov_rate.rs"]
mod kolmogorov_rate;
#[allow(dead_code)]
#[path = "../examples/stock_returns.rs"]
mod stock_returns;
#[allow(dead_code)]
#[path = "../examples/replicate_timing.rs"]
mod replicate_timing;
#[allow(dead_code)]
#[path = "../examples/command_line.rs"]
mod command_line;

#[test]
fn covariance_spectrum_example_runs() {
    covariance_spectrum::run_example().expect("covariance_spectrum example should run");
}

#[test]
fn population_models_example_runs() {
    population_models::run_example().expect("population_models example should run");
}

#[test]
fn bootstrap_replicates_example_runs() {
    bootstrap_replicates::run_example().expect("bootstrap_replicates example should run");
}

#[test]
fn confidence_band_example_runs() {
    confidence_band::run_example().expect("confidence_band example should run");
}

#[test]
fn explained_variance_example_runs() {
    explained_variance::run_example().expect("explained_variance example should run");
}

#[test]
fn gamma_matrix_example_runs() {
    gamma_matrix::run_example().expect("gamma_matrix example should run");
}

#[test]
fn coverage_study_example_runs() {
    coverage_study::run_example().expect("coverage_study example should run");
}

#[test]
fn kolmogorov_rate_example_runs() {
    kolmogorov_rate::run_example().expect("kolmogorov_rate example should run");
}

#[test]
fn stock_returns_example_runs() {
    stock_returns::run_example().expect("stock_returns example should run");
}

#[test]
fn replicate_timing_example_runs() {
    replicate_timing::run_example().expect("replicate_timing example should run");
}

#[test]
fn command_line_example_runs() {
    command_line::run_example().expect("command_line example should run");
}
