//! `segal`: runs one verification per subcommand and writes JSON, CSV, SVG and
//! a manifest into the output directory (`--out`, else `SEGAL_OUT_DIR`, else
//! `./segal-out`).
//!
//! Exit status: 0 when every declared tolerance is met, 2 when one is not,
//! 1 on configuration or I/O errors.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{ComposeArgs, DetArgs, DnArgs, GlueArgs, GmcArgs, SemigroupArgs};
use config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] segal_core::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(_) => "parameter",
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "segal",
    version,
    about = "Verification runner for free-field amplitudes, determinants and semigroups"
)]
struct Cli {
    /// Flat `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "SEGAL_OUT_DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gluing of free Gaussian kernels across a cut circle.
    GlueVerify(GlueArgs),
    /// Determinant gluing formula.
    DetVerify(DetArgs),
    /// DN jump against the Green function, plus the Markov decomposition.
    DnVerify(DnArgs),
    /// Moments of the boundary chaos potential.
    Gmc(GmcArgs),
    /// Feynman-Kac semigroup applied to an observable.
    #[command(args_conflicts_with_subcommands = true)]
    Semigroup {
        #[command(subcommand)]
        action: Option<SemigroupAction>,
        #[command(flatten)]
        args: SemigroupArgs,
    },
    /// Summary table over a results directory.
    Report {
        /// Directory to scan; defaults to the output directory.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SemigroupAction {
    /// Semigroup law `S(t+s) = S(t)S(s)`.
    ComposeCheck(ComposeArgs),
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    let out = cli.out.unwrap_or_else(|| PathBuf::from("segal-out"));
    match cli.command {
        Command::GlueVerify(a) => commands::glue_verify(a, settings, &out),
        Command::DetVerify(a) => commands::det_verify(a, settings, &out),
        Command::DnVerify(a) => commands::dn_verify(a, settings, &out),
        Command::Gmc(a) => commands::gmc(a, settings, &out),
        Command::Semigroup { action: Some(SemigroupAction::ComposeCheck(a)), .. } => {
            commands::compose(a, settings, &out)
        }
        Command::Semigroup { action: None, args } => commands::semigroup(args, settings, &out),
        Command::Report { dir } => {
            let dir = dir.unwrap_or_else(|| out.clone());
            commands::report(&dir, settings, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let diag = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{diag}");
            ExitCode::from(1)
        }
    }
}
