use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mmwave_sir::config::{parse_config_with_env, RunConfig};
use mmwave_sir::Error;

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "mmwave-sir",
    version,
    about = "Beamforming-gain statistics and SIR coverage of mmWave networks"
)]
struct Cli {
    /// JSON run configuration; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides `system.rng_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample beamforming gains to CSV.
    Gains,
    /// Fit gain laws and report KS distances.
    Fit {
        /// Gain CSV written by `gains`; sampled afresh when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Analytic coverage curve.
    Coverage,
    /// Monte Carlo coverage curve.
    Simulate,
    /// Analytic and Monte Carlo coverage joined per threshold.
    Compare,
    /// End-to-end recipe for one figure.
    Reproduce { figure: Figure },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Figure {
    Fig2,
    Fig3,
    Fig5,
    Fig6,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?,
        None => "{}".to_string(),
    };
    let mut config = parse_config_with_env(&text, std::env::vars())?;
    if let Some(seed) = cli.seed {
        config.system.rng_seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let config = load_config(cli)?;
    std::fs::create_dir_all(&config.output_dir)?;
    match &cli.command {
        Command::Gains => commands::gains(&config),
        Command::Fit { input } => commands::fit(&config, input.as_deref()),
        Command::Coverage => commands::coverage(&config),
        Command::Simulate => commands::simulate(&config),
        Command::Compare => commands::compare(&config),
        Command::Reproduce { figure } => match figure {
            Figure::Fig2 => commands::fig2(&config),
            Figure::Fig3 => commands::fig3(&config),
            Figure::Fig5 => commands::fig5(&config),
            Figure::Fig6 => commands::fig6(&config),
        },
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConvergenceFailure { .. } => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::InvalidConfiguration(_) => "invalid_configuration",
        Error::TooFewSamples { .. } | Error::NonFiniteSample { .. } | Error::EmptySamples => {
            "invalid_samples"
        }
        Error::ConvergenceFailure { .. } => "convergence_failure",
        Error::Parse { .. } => "parse_error",
        Error::Validation { .. } => "validation_error",
        Error::Io(_) => "io_error",
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    let mut doc = serde_json::json!({ "error": error_kind(e), "message": e.to_string() });
    match e {
        Error::Validation { field, .. } => doc["field"] = field.as_str().into(),
        Error::Parse { line, column, .. } => {
            doc["line"] = (*line).into();
            doc["column"] = (*column).into();
        }
        Error::ConvergenceFailure { family, .. } => doc["family"] = family.as_str().into(),
        _ => {}
    }
    doc
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
