mod commands;
mod output;
mod scenario_file;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use scenario_file::{ScenarioFile, SchemaError};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "starios", version, about = "Outage analysis of STAR-IOS aided NOMA downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// scenario JSON; omitted fields take their defaults
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,

    /// output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// overrides mc.seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// overrides mc.trials
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// worker threads (0 = all cores); never changes results
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical and model CDFs of the channel power
    ChannelCdf {
        /// comma-separated element counts, overrides channel_cdf.elements
        #[arg(long, value_delimiter = ',')]
        elements: Option<Vec<u32>>,
    },
    /// Outage of both users over the sweep for each selected method
    OutageSweep,
    /// Analytic orders and fitted high-SNR slopes per protocol
    Diversity,
    /// Simulated outage of several protocols on one grid
    CompareProtocols,
    /// Gamma fit of simulated channel power, as JSON
    FitGamma,
}

const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

fn load(cli: &Cli) -> Result<ScenarioFile> {
    let text = match &cli.scenario {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => "{}".to_string(),
    };
    let mut file = ScenarioFile::parse(&text)?;
    if let Some(s) = cli.seed {
        file.mc.seed = s;
    }
    if let Some(t) = cli.trials {
        file.mc.trials = t;
    }
    if let Command::ChannelCdf { elements: Some(e) } = &cli.command {
        file.channel_cdf.elements = e.clone();
    }
    Ok(file.resolve()?)
}

fn run(cli: &Cli) -> Result<()> {
    let file = load(cli)?;
    let text = starios_core::montecarlo::with_threads(cli.threads, || match cli.command {
        Command::ChannelCdf { .. } => commands::channel_cdf(&file),
        Command::OutageSweep => commands::outage_sweep(&file),
        Command::Diversity => commands::diversity(&file),
        Command::CompareProtocols => commands::compare_protocols(&file),
        Command::FitGamma => commands::fit_gamma(&file),
    })?;
    match &cli.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes()).context("writing stdout")?,
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<SchemaError>() || cause.is::<serde_json::Error>() {
            return EXIT_SCHEMA;
        }
        if let Some(e) = cause.downcast_ref::<starios_core::Error>() {
            return if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_SCHEMA };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
