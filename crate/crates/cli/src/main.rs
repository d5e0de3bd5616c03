//! `surflab`: construct, analyze, classify and verify surfaces in static space-times.

mod commands;
mod mesh;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surflab::verify::Suite;
use thiserror::Error;

/// Exit status for verification failures.
const EXIT_VERIFY: u8 = 1;
/// Exit status for config, construction and IO errors.
const EXIT_CONFIG: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "surflab",
    version,
    about = "Time-like surfaces with light-like T in static space-times"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List catalog families with their parameter schemas.
    Families {
        /// Print the schemas as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Build a family and write its grid as CSV.
    Construct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify a family and write the report as JSON.
    #[command(visible_alias = "classify")]
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: PathBuf,
    },
    /// Run a verification suite; the JSON report goes to stdout unless `--report` is given.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        /// Directory of extra family configs (`.toml`/`.json`) checked against their `expect` tables.
        #[arg(long)]
        config_dir: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<_> = Suite::ALL.iter().map(|s| s.as_str()).collect();
        format!(
            "unknown suite `{s}` (expected one of: {})",
            names.join(", ")
        )
    })
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] surflab::Error),
    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("SURFLAB_THREADS must be a positive integer, got `{0}`")]
    Threads(String),
    #[error("cannot start the worker pool: {0}")]
    Pool(String),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SURFLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Threads(raw.clone()))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Pool(e.to_string()))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Families { json } => commands::families(json).map(|_| true),
        Command::Construct { config, out } => commands::construct(&config, &out).map(|_| true),
        Command::Analyze { config, report } => commands::analyze(&config, &report).map(|_| true),
        Command::Verify {
            suite,
            config_dir,
            report,
        } => commands::verify(suite, config_dir.as_deref(), report.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // help and version exit 0, usage errors exit 2
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
