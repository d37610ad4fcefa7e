use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trm_core::runner::{self, Format, Kind, RunError, RunOptions};

/// Reproducible experiments with membrane measurement models.
#[derive(Parser)]
#[command(name = "trm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    config: PathBuf,
    /// Write the result here instead of the config's output path / stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Run any experiment config
    Run(Common),
    /// Universal-average convergence scan (CSV by default)
    UniversalScan(Common),
    /// Sphere-model counterexample or custom measurement chain
    Sphere(Common),
    /// Classify joint triples and transition sets (accepts a bare bundle)
    Classify(Common),
    /// Compare the membrane model with the Born rule on random states
    OracleCompare(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, kind) = match cli.command {
        Command::Run(c) => (c, None),
        Command::UniversalScan(c) => (c, Some(Kind::Universal)),
        Command::Sphere(c) => (c, Some(Kind::Sphere)),
        Command::Classify(c) => (c, Some(Kind::Classify)),
        Command::OracleCompare(c) => (c, Some(Kind::Oracle)),
    };
    let result = runner::seed_from_env().and_then(|seed_override| {
        let opts = RunOptions {
            out: common.out,
            workers: common.workers,
            format: common.format,
            expect_kind: kind,
            seed_override,
        };
        runner::run(&common.config, &opts)
    });
    match result {
        Ok(outcome) => {
            if outcome.written_to.is_none() {
                let _ = std::io::stdout().write_all(outcome.rendered.as_bytes());
            }
            if outcome.exit_code != runner::EXIT_OK {
                eprintln!("trm: check failed (deviation above threshold)");
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("trm: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &RunError) -> u8 {
    e.exit_code() as u8
}
