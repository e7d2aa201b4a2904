//! Command-line surface: config ingestion, subcommand dispatch and report
//! emission.

pub mod commands;
pub mod config;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{cmd_check, cmd_report, cmd_simulate, cmd_verify, CommandError, Options, Verifier};
use config::RunConfig;

/// Exit code for configuration and usage errors.
pub const EXIT_CONFIG: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "cylsde", version, about = "Spectral simulation and verification for SPDEs driven by cylindrical Lévy noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Simulate even when the integrability check fails.
    #[arg(long, global = true)]
    pub force: bool,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the integrability checkers.
    Check,
    /// Simulate one path and write `path.csv`.
    Simulate,
    /// Run one verifier suite.
    Verify {
        #[arg(value_parser = parse_verifier)]
        which: Verifier,
    },
    /// Run the checks and every verifier configured under `experiment`.
    Report,
}

fn parse_verifier(s: &str) -> Result<Verifier, String> {
    s.parse()
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CommandError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CommandError::Config(config::ConfigError {
                path: "--threads".into(),
                message: "must be positive".into(),
            }));
        }
        // Fails only if a pool already exists, in which case it is reused.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let path = cli.config.as_ref().ok_or_else(|| {
        CommandError::Config(config::ConfigError {
            path: "--config".into(),
            message: "a config file is required".into(),
        })
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| {
        CommandError::Config(config::ConfigError {
            path: "--config".into(),
            message: format!("cannot read {}: {e}", path.display()),
        })
    })?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = match &cli.command {
        Command::Check => cmd_check(&cfg)?,
        Command::Simulate => {
            let (report, csv) = cmd_simulate(&cfg, Options { force: cli.force })?;
            std::fs::create_dir_all(&cli.out)?;
            std::fs::write(cli.out.join("path.csv"), csv)?;
            report
        }
        Command::Verify { which } => cmd_verify(&cfg, *which)?,
        Command::Report => cmd_report(&cfg)?,
    };
    report.write(&cli.out)?;
    print!("{}", report.summary());
    Ok(report.overall().exit_code())
}
