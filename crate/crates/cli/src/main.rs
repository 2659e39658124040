//! `qfair`: batch experiments for the quantum fair-computation simulator.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Format, Overrides};

#[derive(Parser)]
#[command(name = "qfair", version, about = "Run, audit and analyze quantum fair two-party protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the configured runs and record outcome frequencies and transcripts.
    Run(Flags),
    /// Estimate forgery detection and compare with the closed forms.
    Detect(Flags),
    /// Compare real and ideal outcome distributions for every abort case.
    Fairness(Flags),
    /// Check every catalog deviation against the honest utility.
    Nash(Flags),
}

#[derive(clap::Args)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    trials: Option<u64>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Flags {
    fn load(&self) -> Result<ExperimentConfig> {
        let overrides = Overrides { seed: self.seed, trials: self.trials, out: self.out.clone(), format: self.format };
        ExperimentConfig::load(&self.config, &overrides)
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.outputs.dir.clone().unwrap_or_else(|| PathBuf::from("qfair-out"))
}

fn execute(cli: Cli) -> Result<bool> {
    let (flags, name) = match &cli.command {
        Command::Run(f) => (f, "run"),
        Command::Detect(f) => (f, "detect"),
        Command::Fairness(f) => (f, "fairness"),
        Command::Nash(f) => (f, "nash"),
    };
    let cfg = flags.load()?;
    let dir = out_dir(&cfg);
    let format = cfg.outputs.format;
    let report = match name {
        "run" => {
            let out = commands::run(&cfg)?;
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("transcripts.csv");
            std::fs::write(&path, &out.transcripts).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} transcripts to {}", out.recorded, path.display());
            out.report
        }
        "detect" => commands::detect(&cfg)?,
        "fairness" => commands::fairness(&cfg)?,
        _ => commands::nash(&cfg)?,
    };
    let path = report.write(&dir, format)?;
    print!("{}", report.render(format)?);
    eprintln!("seed {} trials {} config {}", report.seed, report.trials, report.config_hash);
    eprintln!("wrote {}", path.display());
    Ok(report.all_pass())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
