use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use molnoise::config::{self, ExperimentKind};
use molnoise::experiment::Overrides;
use molnoise::{presets, run_experiment, Error, ExperimentConfig, Result};

/// Noise, interference and ISI experiments for a passive diffusive receiver.
#[derive(Debug, Parser)]
#[command(name = "molnoise", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Master seed for the simulation.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo realizations (0 = analytic only).
    #[arg(long)]
    realizations: Option<usize>,
    /// Output CSV path; the manifest goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Continuous noise sources over time.
    NoiseTrace(RunArgs),
    /// Interfering transmitters over time.
    Interferer(RunArgs),
    /// Bit error probability against the ISI depth.
    Ber(RunArgs),
    /// Any config, whatever its kind.
    Run(RunArgs),
    /// Report every problem in a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a built-in experiment; without a name, list them.
    Preset {
        name: Option<String>,
        /// Print the preset's TOML instead of running it.
        #[arg(long)]
        print: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn run(config: ExperimentConfig, common: &Common) -> Result<()> {
    let mut config = config;
    Overrides { seed: common.seed, realizations: common.realizations }.apply(&mut config);
    let out = run_experiment(&config, common.out.as_deref())?;
    let rows = out.csv.lines().count().saturating_sub(1);
    println!("wrote {} ({rows} rows)", out.csv_path.display());
    println!("wrote {}", out.manifest_path.display());
    Ok(())
}

fn run_kind(args: &RunArgs, expected: Option<ExperimentKind>) -> Result<()> {
    let config = ExperimentConfig::load(&args.config)?;
    if let Some(k) = expected {
        if config.kind != k {
            return Err(Error::Config(format!(
                "{} has kind = \"{}\"; use `molnoise run` or the `{}` subcommand",
                args.config.display(),
                config.kind,
                subcommand_for(config.kind)
            )));
        }
    }
    run(config, &args.common)
}

fn subcommand_for(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::NoiseTrace => "noise-trace",
        ExperimentKind::Interferer => "interferer",
        ExperimentKind::BerVsF => "ber",
        ExperimentKind::CustomSweep => "run",
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::NoiseTrace(a) => run_kind(&a, Some(ExperimentKind::NoiseTrace)),
        Command::Interferer(a) => run_kind(&a, Some(ExperimentKind::Interferer)),
        Command::Ber(a) => run_kind(&a, Some(ExperimentKind::BerVsF)),
        Command::Run(a) => run_kind(&a, None),
        Command::Validate { config } => {
            let report = config::validate(&ExperimentConfig::load(&config)?);
            if report.is_valid() {
                println!("{}: valid", config.display());
                Ok(())
            } else {
                Err(Error::Validation(report))
            }
        }
        Command::Preset { name: None, .. } => {
            for n in presets::names() {
                println!("{n}");
            }
            Ok(())
        }
        Command::Preset { name: Some(name), print, common } => {
            let unknown = || {
                let known: Vec<_> = presets::names().collect();
                Error::Config(format!("unknown preset {name:?} (known: {})", known.join(", ")))
            };
            if print {
                print!("{}", presets::source(&name).ok_or_else(unknown)?);
                return Ok(());
            }
            let config = presets::preset(&name).ok_or_else(unknown)??;
            run(config, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
