//! Command-line front end: profile, verify, symmetry, fit, evolve.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
pub mod config;
pub mod output;

pub use output::g17;

#[derive(Debug, Parser)]
#[command(name = "kdvinv", version, about = "KdV-type travelling waves and their inverted counterparts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, clap::Args)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV tables and report files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for random fields (overrides the configuration).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Pass threshold, overriding the command's default.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Spatial differentiation used by residual checks.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Spectral,
    Fd8,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Sample a catalog solution to CSV.
    Profile,
    /// Residual reports for solution/equation pairs.
    Verify,
    /// Inversion-symmetry matrix.
    Symmetry,
    /// Fit travelling-wave coefficients.
    Fit,
    /// Time-evolve an initial field.
    Evolve,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error in {param}: {reason}")]
    Config { param: String, reason: String },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] kdvinv_core::Error),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(kdvinv_core::Error::NumericalAbort { .. }) => 3,
            _ => 2,
        }
    }
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    VerificationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Ok => 0,
            Outcome::VerificationFailed => 1,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(t) = cli.global.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config {
                param: "--tolerance".into(),
                reason: format!("must be positive and finite, got {t}"),
            });
        }
    }
    match cli.command {
        Command::Profile => commands::profile(&cli.global),
        Command::Verify => commands::verify(&cli.global),
        Command::Symmetry => commands::symmetry(&cli.global),
        Command::Fit => commands::fit(&cli.global),
        Command::Evolve => commands::evolve(&cli.global),
    }
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
