mod commands;
mod config;
mod io;

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Io { path: String, source: std::io::Error },
    Csv { path: String, source: csv::Error },
    Parse { path: String, line: usize, reason: String },
    Config { path: String, line: usize, reason: String },
    Usage { reason: String },
    MissingModel { path: String },
    Internal { reason: String },
    Lib(ltsta::Error),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn csv(path: &Path, source: csv::Error) -> Self {
        CliError::Csv {
            path: path.display().to_string(),
            source,
        }
    }

    /// 1 for anything the caller handed us, 2 for estimation failures.
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if !e.is_input_error() => 2,
            CliError::Internal { .. } => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "numerical",
            _ => "input",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
            CliError::Csv { path, source } => write!(f, "{path}: {source}"),
            CliError::Parse { path, line, reason } => {
                write!(f, "{path} line {line}: {reason}")
            }
            CliError::Config { path, line, reason } => {
                write!(f, "{path} line {line}: {reason}")
            }
            CliError::Usage { reason } => write!(f, "{reason}"),
            CliError::MissingModel { path } => write!(f, "model artifact {path} not found"),
            CliError::Internal { reason } => write!(f, "{reason}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

/// Piecewise-linear trend, trigonometric seasonality, ARMA errors:
/// fit, forecast, and evaluate trend-stationary series.
#[derive(Parser)]
#[command(name = "ltsta", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides mirroring the config-file keys; flags win over the file.
#[derive(Args, Default)]
struct ConfigOpts {
    /// Flat key = value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// identity, log, or box_cox
    #[arg(long)]
    transform: Option<String>,
    /// Box-Cox exponent
    #[arg(long)]
    lambda: Option<String>,
    /// Observations per seasonal cycle
    #[arg(long)]
    period: Option<String>,
    /// Minimum regime length
    #[arg(long)]
    h: Option<String>,
    /// Break budget, or `auto`
    #[arg(long)]
    m_max: Option<String>,
    /// absolute, ratio, or l_method
    #[arg(long)]
    policy: Option<String>,
    /// Fixed break count
    #[arg(long)]
    manual_m: Option<String>,
    /// Harmonic cap, or `auto`
    #[arg(long)]
    n_max: Option<String>,
    #[arg(long)]
    p_max: Option<String>,
    #[arg(long)]
    q_max: Option<String>,
    #[arg(long)]
    extra_passes: Option<String>,
    /// Forecast steps
    #[arg(long)]
    horizon: Option<String>,
    /// Interval coverage in (0, 1)
    #[arg(long)]
    level: Option<String>,
    /// Simulation seed
    #[arg(long)]
    seed: Option<String>,
}

impl ConfigOpts {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut run = RunConfig::default();
        if let Some(path) = &self.config {
            config::load_config_file(path, &mut run)?;
        }
        let overrides: [(&str, &Option<String>); 14] = [
            ("transform", &self.transform),
            ("lambda", &self.lambda),
            ("period", &self.period),
            ("h", &self.h),
            ("m_max", &self.m_max),
            ("policy", &self.policy),
            ("manual_m", &self.manual_m),
            ("n_max", &self.n_max),
            ("p_max", &self.p_max),
            ("q_max", &self.q_max),
            ("extra_passes", &self.extra_passes),
            ("horizon", &self.horizon),
            ("level", &self.level),
            ("seed", &self.seed),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                run.set(key, value)
                    .map_err(|reason| CliError::Usage { reason })?;
            }
        }
        Ok(run)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model; writes model.json, decomposition.csv, selection.json
    Fit {
        /// Input CSV: `label,value` or a single `value` column
        #[arg(long)]
        input: PathBuf,
        /// Directory for the artifacts
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Forecast from a fitted model artifact
    Forecast {
        /// model.json written by `fit`
        #[arg(long)]
        model: PathBuf,
        /// Output path; `.json` switches the format from CSV
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Score a forecast against actuals
    Evaluate {
        /// Forecast CSV (`value` or `point` column)
        #[arg(long)]
        forecast: PathBuf,
        /// Held-out actual values
        #[arg(long)]
        actual: PathBuf,
        /// Training series, for the MASE scale
        #[arg(long)]
        train: PathBuf,
        /// metrics.json destination
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Fit, forecast, and score every series of a CIF-layout dataset
    Benchmark {
        /// Semicolon-separated dataset, one series per line
        #[arg(long)]
        input: PathBuf,
        /// Results CSV destination
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Break-count selection report only, no full fit
    Breaks {
        #[arg(long)]
        input: PathBuf,
        /// selection.json destination
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Generate a series from a model specification
    Simulate {
        /// SimulationSpec JSON
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV destination
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit { input, out_dir, opts } => {
            commands::cmd_fit(&input, &out_dir, &opts.resolve()?)
        }
        Command::Forecast { model, output, opts } => {
            commands::cmd_forecast(&model, &output, &opts.resolve()?)
        }
        Command::Evaluate {
            forecast,
            actual,
            train,
            output,
            opts,
        } => commands::cmd_evaluate(&forecast, &actual, &train, &output, &opts.resolve()?),
        Command::Benchmark { input, output, opts } => {
            commands::cmd_benchmark(&input, &output, &opts.resolve()?)
        }
        Command::Breaks { input, output, opts } => {
            commands::cmd_breaks(&input, &output, &opts.resolve()?)
        }
        Command::Simulate { spec, output, opts } => {
            commands::cmd_simulate(&spec, &output, &opts.resolve()?)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        let payload = serde_json::json!({
            "error": error.to_string(),
            "kind": error.kind(),
        });
        eprintln!("{payload}");
        std::process::exit(error.exit_code());
    }
}
