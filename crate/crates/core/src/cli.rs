//! Command-line surface: argument parsing, the JSON run configuration, and
//! the five subcommands. The binary is a thin wrapper around [`run`].

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bench::{fit_cost_model, time_replicates};
use crate::bootstrap::{replicate_eigenvalues, ReplicateScheme, Statistic, Transformation};
use crate::error::{Error, Result};
use crate::gamma::gamma_check;
use crate::ingest::{load_matrix_csv, load_prices, rank_by_volume, to_log_returns, DEFAULT_PERIOD};
use crate::intervals::{band_for_mode, select_components, TauMode};
use crate::linalg::FactorRoute;
use crate::metrics::{coverage_experiment, rate_study, CoverageConfig, RateConfig};
use crate::models::{DecayProfile, GeneratorFamily};
use crate::report;
use crate::resample::StreamKey;

#[derive(Debug, Parser)]
#[command(name = "eigenboot", version, about = "Bootstrap confidence bands for leading PCA eigenvalues")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Master seed for every random stream
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads [default: all cores]; results do not depend on it
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output CSV path [default: stdout]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat JSON file of run settings; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simultaneous coverage and width over an (n, p) grid
    Simulate(SimulateArgs),
    /// Confidence bands for a return matrix or price file
    Ci(CiArgs),
    /// Kolmogorov-distance estimates along an n grid and their log-log slope
    Rates(RatesArgs),
    /// Monte Carlo fourth-moment matrix against its closed form
    GammaCheck(GammaArgs),
    /// Per-replicate timing and cost-model fit
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// gaussian, elliptical, iid-twopoint or iid-uniform
    #[arg(long)]
    pub model: Option<String>,
    /// polynomial (j^-parameter), exponential (parameter^j) or gap
    #[arg(long)]
    pub decay: Option<String>,
    /// γ, δ or the gap g, depending on --decay
    #[arg(long)]
    pub parameter: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample sizes, comma separated
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Dimensions, comma separated
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    #[arg(long)]
    pub k: Option<usize>,
    /// eigenvalues or proportions
    #[arg(long)]
    pub statistic: Option<String>,
    /// log, sqrt, identity or power:<a>
    #[arg(long)]
    pub transform: Option<String>,
    /// adaptive or a fixed value in [0, 1]
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Bootstrap replicates per trial
    #[arg(short = 'B', long = "replicates")]
    pub b: Option<usize>,
    /// auto, covariance, gram or subspace
    #[arg(long)]
    pub route: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Independent datasets for the sampling law
    #[arg(short = 'M', long)]
    pub datasets: Option<usize>,
    /// Bootstrap replicates per held-out dataset
    #[arg(short = 'B', long = "replicates")]
    pub b: Option<usize>,
    /// Held-out datasets; the median distance is reported
    #[arg(short = 'R', long)]
    pub held_out: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GammaArgs {
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Monte Carlo draws of Z
    #[arg(long)]
    pub n_mc: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Timed replicates per cell
    #[arg(short = 'B', long = "replicates")]
    pub b: Option<usize>,
    /// auto, covariance, gram or subspace
    #[arg(long)]
    pub route: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CiArgs {
    /// Numeric n x p CSV, optional header row
    #[arg(long, conflicts_with = "prices")]
    pub input: Option<PathBuf>,
    /// Price CSV (long or wide layout), converted to log returns
    #[arg(long)]
    pub prices: Option<PathBuf>,
    /// Trading days per return when reading prices
    #[arg(long, default_value_t = DEFAULT_PERIOD)]
    pub period: usize,
    /// Keep only the most traded tickers (needs a volume column)
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub transform: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(short = 'B', long = "replicates")]
    pub b: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Also band the explained-variance proportions
    #[arg(long)]
    pub proportions: bool,
    /// Report the fewest components whose proportion lower bound exceeds this
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Skip re-centering resamples at their mean
    #[arg(long)]
    pub uncentered: bool,
}

/// τ in a config file: a number or the string "adaptive".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSpec {
    Fixed(f64),
    Named(String),
}

/// Settings readable from `--config`. Unset fields fall back to flags, then
/// to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub decay: Option<String>,
    pub parameter: Option<f64>,
    pub n: Option<Vec<usize>>,
    pub p: Option<Vec<usize>>,
    pub k: Option<usize>,
    pub statistic: Option<String>,
    pub transform: Option<String>,
    pub tau: Option<TauSpec>,
    pub alpha: Option<f64>,
    pub trials: Option<usize>,
    #[serde(rename = "B", alias = "b")]
    pub b: Option<usize>,
    pub route: Option<String>,
    pub datasets: Option<usize>,
    pub held_out: Option<usize>,
    pub n_mc: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::from(e).context(format!("parsing {}", path.display())))
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: field.into(), reason: reason.into() }
}

pub fn parse_decay(decay: &str, parameter: f64) -> Result<DecayProfile> {
    let profile = match decay.to_ascii_lowercase().as_str() {
        "polynomial" => DecayProfile::Polynomial(parameter),
        "exponential" => DecayProfile::Exponential(parameter),
        "gap" | "custom" => DecayProfile::gap(parameter).map_err(|e| config_err("g", e.to_string()))?,
        other => return Err(config_err("decay", format!("unknown decay `{other}` (polynomial, exponential, gap)"))),
    };
    profile.validate()?;
    Ok(profile)
}

fn parse_tau(s: &str) -> Result<TauMode> {
    s.parse()
}

fn tau_from_config(spec: &TauSpec) -> Result<TauMode> {
    match spec {
        TauSpec::Fixed(t) => parse_tau(&t.to_string()),
        TauSpec::Named(s) => parse_tau(s),
    }
}

fn parse_statistic(s: &str) -> Result<Statistic> {
    match s.to_ascii_lowercase().as_str() {
        "eigenvalues" => Ok(Statistic::Eigenvalues),
        "proportions" => Ok(Statistic::Proportions),
        _ => Err(config_err("statistic", format!("unknown statistic `{s}` (eigenvalues, proportions)"))),
    }
}

fn single(field: &str, values: Vec<usize>) -> Result<usize> {
    match values.as_slice() {
        [v] => Ok(*v),
        _ => Err(config_err(field, format!("expected a single value, got {values:?}"))),
    }
}

/// Where CSV goes, and where human-readable notes go (stdout when the CSV
/// is written to a file, stderr otherwise).
struct Sink {
    csv: Box<dyn Write>,
    to_file: bool,
}

impl Sink {
    fn open(out: Option<&Path>) -> Result<Self> {
        Ok(match out {
            Some(path) => Sink {
                csv: Box::new(BufWriter::new(
                    File::create(path).map_err(|e| Error::from(e).context(format!("creating {}", path.display())))?,
                )),
                to_file: true,
            },
            None => Sink { csv: Box::new(io::stdout().lock()), to_file: false },
        })
    }

    fn note(&self, text: &str) {
        if self.to_file {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
    }
}

/// Settings shared by all subcommands after merging flags and config.
struct Shared {
    config: RunConfig,
    seed: u64,
    out: Option<PathBuf>,
}

/// Parses nothing; executes an already-parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let workers = cli.global.workers.or(config.workers);
    if workers == Some(0) {
        return Err(config_err("workers", "must be at least 1"));
    }
    let shared = Shared {
        seed: cli.global.seed.or(config.seed).unwrap_or(0),
        out: cli.global.out.clone().or_else(|| config.out.clone()),
        config,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| config_err("workers", e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate(&shared, a),
        Command::Ci(a) => ci(&shared, a),
        Command::Rates(a) => rates(&shared, a),
        Command::GammaCheck(a) => gamma(&shared, a),
        Command::Bench(a) => bench(&shared, a),
    })
}

fn model_settings(m: ModelArgs, c: &RunConfig) -> Result<(GeneratorFamily, DecayProfile)> {
    let generator = GeneratorFamily::parse(&m.model.or_else(|| c.model.clone()).unwrap_or_else(|| "gaussian".into()))?;
    let decay = m.decay.or_else(|| c.decay.clone()).unwrap_or_else(|| "polynomial".into());
    let parameter = m.parameter.or(c.parameter).unwrap_or(1.0);
    let profile = parse_decay(&decay, parameter)?;
    if profile.has_tied_leading() {
        log::warn!("gap parameter 0 ties the leading eigenvalues; the bootstrap is not expected to be consistent here");
    }
    Ok((generator, profile))
}

/// Builds the coverage experiment described by flags and config.
pub fn coverage_config(args: SimulateArgs, c: &RunConfig, seed: u64) -> Result<CoverageConfig> {
    let (generator, decay) = model_settings(args.model, c)?;
    let tau = match (args.tau, &c.tau) {
        (Some(t), _) => parse_tau(&t)?,
        (None, Some(spec)) => tau_from_config(spec)?,
        (None, None) => TauMode::Adaptive,
    };
    let cfg = CoverageConfig {
        generator,
        decay,
        n_grid: args.n.or_else(|| c.n.clone()).unwrap_or_else(|| vec![500]),
        p_grid: args.p.or_else(|| c.p.clone()).unwrap_or_else(|| vec![10]),
        k: args.k.or(c.k).unwrap_or(5),
        statistic: parse_statistic(&args.statistic.or_else(|| c.statistic.clone()).unwrap_or_else(|| "eigenvalues".into()))?,
        transform: args.transform.or_else(|| c.transform.clone()).unwrap_or_else(|| "sqrt".into()).parse::<Transformation>()?,
        tau,
        alpha: args.alpha.or(c.alpha).unwrap_or(0.05),
        trials: args.trials.or(c.trials).unwrap_or(100),
        b: args.b.or(c.b).unwrap_or(500),
        seed,
        route: args.route.or_else(|| c.route.clone()).unwrap_or_else(|| "auto".into()).parse()?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn simulate(s: &Shared, args: SimulateArgs) -> Result<()> {
    let cfg = coverage_config(args, &s.config, s.seed)?;
    let records = coverage_experiment(&cfg)?;
    let mut sink = Sink::open(s.out.as_deref())?;
    report::write_records(&records, &mut sink.csv)?;
    sink.csv.flush()?;
    for r in &records {
        sink.note(&format!(
            "n = {:>5}  p = {:>4}  coverage = {:.3} (se {:.3})  avg width = {:.4}  failures = {}",
            r.n, r.p, r.coverage, r.coverage_se, r.avg_width, r.failures
        ));
    }
    Ok(())
}

fn ci(s: &Shared, args: CiArgs) -> Result<()> {
    let c = &s.config;
    let (names, data) = match (&args.input, &args.prices) {
        (Some(path), None) => load_matrix_csv(path).map_err(|e| e.context(format!("reading {}", path.display())))?,
        (None, Some(path)) => {
            let loaded = load_prices(path).map_err(|e| e.context(format!("reading {}", path.display())))?;
            if !loaded.dropped.is_empty() {
                eprintln!("dropped tickers with missing prices: {}", loaded.dropped.join(", "));
            }
            let mut table = loaded.table;
            if let Some(top) = args.top {
                table = table.select(&rank_by_volume(&table, top)?)?;
            }
            let returns = to_log_returns(&table, args.period).map_err(|e| e.context("computing log returns"))?;
            (returns.tickers, returns.values)
        }
        _ => return Err(config_err("input", "give exactly one of --input or --prices")),
    };
    let k = args.k.or(c.k).unwrap_or(5);
    let transform: Transformation = args.transform.or_else(|| c.transform.clone()).unwrap_or_else(|| "sqrt".into()).parse()?;
    let tau = match (args.tau, &c.tau) {
        (Some(t), _) => parse_tau(&t)?,
        (None, Some(spec)) => tau_from_config(spec)?,
        (None, None) => TauMode::Adaptive,
    };
    let b = args.b.or(c.b).unwrap_or(1000);
    let alpha = args.alpha.or(c.alpha).unwrap_or(0.05);
    let scheme = ReplicateScheme::new(StreamKey::new(s.seed).with("ci", 0)).centered(!args.uncentered);
    let reps = replicate_eigenvalues(&data, k, b, &scheme).map_err(|e| {
        e.context(format!("bootstrapping {} x {} data ({} columns)", data.nrows(), data.ncols(), names.len()))
    })?;
    let eig = band_for_mode(&reps.statistic(Statistic::Eigenvalues), transform, tau, alpha)?;
    let prop = if args.proportions || args.threshold.is_some() {
        Some(band_for_mode(&reps.statistic(Statistic::Proportions), transform, tau, alpha)?)
    } else {
        None
    };
    let mut bands = vec![&eig];
    bands.extend(prop.as_ref());
    let mut sink = Sink::open(s.out.as_deref())?;
    report::write_bands(&bands, &mut sink.csv)?;
    sink.csv.flush()?;
    sink.note(&format!("n = {}, p = {}, B = {b}", data.nrows(), data.ncols()));
    for band in &bands {
        sink.note(&report::band_table(band));
    }
    if let (Some(threshold), Some(band)) = (args.threshold, &prop) {
        match select_components(band, threshold) {
            Some(j) => sink.note(&format!("selected components: {j}")),
            None => sink.note(&format!("selected components: none of the first {k} clear {threshold}")),
        }
    }
    Ok(())
}

/// Builds the rate study described by flags and config.
pub fn rate_config(args: RatesArgs, c: &RunConfig, seed: u64) -> Result<RateConfig> {
    let (generator, decay) = model_settings(args.model, c)?;
    let p = match args.p {
        Some(p) => p,
        None => single("p", c.p.clone().unwrap_or_else(|| vec![100]))?,
    };
    Ok(RateConfig {
        generator,
        decay,
        p,
        k: args.k.or(c.k).unwrap_or(2),
        n_grid: args.n.or_else(|| c.n.clone()).unwrap_or_else(|| vec![250, 1000, 4000]),
        datasets: args.datasets.or(c.datasets).unwrap_or(300),
        replicates: args.b.or(c.b).unwrap_or(300),
        held_out: args.held_out.or(c.held_out).unwrap_or(5),
        seed,
    })
}

fn rates(s: &Shared, args: RatesArgs) -> Result<()> {
    let cfg = rate_config(args, &s.config, s.seed)?;
    let study = rate_study(&cfg)?;
    let mut sink = Sink::open(s.out.as_deref())?;
    report::write_deltas(&study.estimates, s.seed, &mut sink.csv)?;
    sink.csv.flush()?;
    match study.slope {
        Some(slope) => sink.note(&format!("rate slope: {slope:.4}")),
        None => sink.note("rate slope: needs at least 3 sample sizes with positive distance"),
    }
    Ok(())
}

fn gamma(s: &Shared, args: GammaArgs) -> Result<()> {
    let c = &s.config;
    let generator = GeneratorFamily::parse(&args.model.or_else(|| c.model.clone()).unwrap_or_else(|| "gaussian".into()))?;
    let p = match args.p {
        Some(p) => p,
        None => single("p", c.p.clone().unwrap_or_else(|| vec![5]))?,
    };
    let k = args.k.or(c.k).unwrap_or(3);
    let n_mc = args.n_mc.or(c.n_mc).unwrap_or(200_000);
    let check = gamma_check(generator, p, k, n_mc, &StreamKey::new(s.seed))?;
    let mut sink = Sink::open(s.out.as_deref())?;
    report::write_gamma(&check, &mut sink.csv)?;
    sink.csv.flush()?;
    sink.note(&format!("max abs error: {:.4}", check.max_abs_error));
    Ok(())
}

fn bench(s: &Shared, args: BenchArgs) -> Result<()> {
    let c = &s.config;
    let ns = args.n.or_else(|| c.n.clone()).unwrap_or_else(|| vec![500]);
    let ps = args.p.or_else(|| c.p.clone()).unwrap_or_else(|| vec![50, 200]);
    let k = args.k.or(c.k).unwrap_or(5);
    let b = args.b.or(c.b).unwrap_or(200);
    let route: FactorRoute = args.route.or_else(|| c.route.clone()).unwrap_or_else(|| "subspace".into()).parse()?;
    if b < 200 {
        log::warn!("B = {b}: timings below 200 replicates are noisy");
    }
    let mut rows = Vec::new();
    for &n in &ns {
        for &p in &ps {
            rows.push(time_replicates(n, p, k, b, route, s.seed)?);
        }
    }
    let mut sink = Sink::open(s.out.as_deref())?;
    report::write_bench(&rows, &mut sink.csv)?;
    sink.csv.flush()?;
    if rows.len() >= 2 {
        sink.note(&report::fit_summary(&fit_cost_model(&rows)?));
    }
    Ok(())
}
