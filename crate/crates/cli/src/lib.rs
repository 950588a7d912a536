//! Command-line driver: ingest, fit, synth and check subcommands over a
//! single TOML run configuration.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use farepanel::report::Format;
use farepanel::selfcheck::CheckOptions;
use farepanel::{DepVar, Granularity};

pub use commands::{cmd_check, cmd_fit, cmd_ingest, cmd_synth};
pub use config::{Overrides, RunConfig};
pub use error::{exit, CliError};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GranularityArg {
    Day,
    Month,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DepVarArg {
    Raw,
    Log100,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Text,
    Delim,
    Markup,
}

#[derive(Debug, Parser)]
#[command(name = "farepanel", version, about = "Fare-quote panel pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Run configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Heteroskedasticity-robust standard errors.
    #[arg(long)]
    pub robust_se: bool,
    #[arg(long, value_enum)]
    pub granularity: Option<GranularityArg>,
    #[arg(long, value_enum)]
    pub depvar: Option<DepVarArg>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Seed for synthetic generation.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select the estimation sample from raw quotes.
    Ingest(CommonArgs),
    /// Fit every configured table and write tables and records.
    Fit(CommonArgs),
    /// Write a synthetic raw panel and its planted coefficients.
    Synth(CommonArgs),
    /// Run the bundled estimator self-check.
    Check {
        /// Demeaning tolerance for the convergence check.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
}

impl CommonArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            robust_se: self.robust_se,
            granularity: self.granularity.map(|g| match g {
                GranularityArg::Day => Granularity::Day,
                GranularityArg::Month => Granularity::Month,
            }),
            depvar: self.depvar.map(|d| match d {
                DepVarArg::Raw => DepVar::Raw,
                DepVarArg::Log100 => DepVar::Log100,
            }),
            format: self.format.map(|f| match f {
                FormatArg::Text => Format::Text,
                FormatArg::Delim => Format::Delim,
                FormatArg::Markup => Format::Markup,
            }),
            seed: self.seed,
        }
    }

    pub fn load(&self) -> Result<RunConfig, CliError> {
        RunConfig::load(&self.config, &self.overrides())
    }
}

/// Runs one parsed invocation, returning standard-output text.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(&a.load()?),
        Command::Fit(a) => cmd_fit(&a.load()?),
        Command::Synth(a) => cmd_synth(&a.load()?),
        Command::Check { tol, max_iter } => cmd_check(CheckOptions {
            tol: *tol,
            max_iter: *max_iter,
        }),
    }
}
