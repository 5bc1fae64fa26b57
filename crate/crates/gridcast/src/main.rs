use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gridcast::config::parse_override;
use gridcast::{experiments, output, ConfigError, ExperimentKind, HarnessError, RunConfig};

#[derive(Parser)]
#[command(
    name = "gridcast",
    version,
    about = "Forecast-driven battery control experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration. Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; results go to <out>/<experiment>/.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override any config key, e.g. `--set noise.replicates=5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Forecast accuracy and control performance per model
    Baseline,
    /// Perfect-forecast control across planning horizons
    Horizon,
    /// Cross-building model transfer and similarity-based reuse
    Generalisation,
    /// Accuracy against training data duration
    Volume,
    /// Change-point screening of training data
    Changepoint,
    /// Accuracy against number of covariate features
    Features,
    /// Accuracy against online update frequency
    Online,
    /// Control performance against forecast noise
    Noise,
    /// A single simulation run with full trajectory export
    Simulate,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Self::Baseline => ExperimentKind::Baseline,
            Self::Horizon => ExperimentKind::Horizon,
            Self::Generalisation => ExperimentKind::Generalisation,
            Self::Volume => ExperimentKind::Volume,
            Self::Changepoint => ExperimentKind::Changepoint,
            Self::Features => ExperimentKind::Features,
            Self::Online => ExperimentKind::Online,
            Self::Noise => ExperimentKind::Noise,
            Self::Simulate => ExperimentKind::Simulate,
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut overrides = cli
        .set
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    let key = |k: &str| vec![k.to_string()];
    if let Some(out) = &cli.out {
        overrides.push((key("out"), toml::Value::String(out.display().to_string())));
    }
    if let Some(seed) = cli.seed {
        let seed = i64::try_from(seed).map_err(|_| ConfigError::new("seed must be below 2^63"))?;
        overrides.push((key("seed"), toml::Value::Integer(seed)));
    }
    if let Some(threads) = cli.threads {
        overrides.push((key("threads"), toml::Value::Integer(threads as i64)));
    }
    overrides.push((
        key("experiment"),
        toml::Value::String(cli.command.kind().name().into()),
    ));
    match &cli.config {
        Some(path) => RunConfig::load(path, &overrides),
        None => RunConfig::from_toml_with("", &overrides),
    }
}

fn execute(cli: &Cli) -> Result<PathBuf, HarnessError> {
    let cfg = resolve(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::Other(format!("thread pool: {e}")))?;
    let out = pool.install(|| experiments::run(cli.command.kind(), &cfg))?;
    output::write_output(&cfg.out, &cfg, &out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gridcast: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
