//! `dkg`: run the simulator and the estimate checks from the command line.
//!
//! Every subcommand takes `-c FILE` (flat `section.key = value` lines),
//! `-o DIR`, and trailing `--section.key=value` overrides that win over the
//! file. Exit status is 0 when all invariants hold, 1 when one fails, and
//! 2 when the configuration is rejected.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;
use report::Output;

#[derive(Parser)]
#[command(name = "dkg", version, about = "Dirac-Klein-Gordon pseudospectral simulator and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file with `section.key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, default_value = "dkg-out")]
    out: PathBuf,
    /// Overrides such as `--grid.n=16` or `--time.dt 1e-3`; must come last.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0.., value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the system and record diagnostics and snapshots.
    Simulate(Common),
    /// Certify the resonance lower bounds and run the vanishing-support grid.
    ResonanceScan(Common),
    /// Check the Dirac matrix and projector identities and the null structure.
    VerifyAlgebra(Common),
    /// Fit the dispersive kernel constants over dyadic scales.
    VerifyKernel(Common),
    /// Sample trilinear ratios and the dyadic summation weight.
    Trilinear(Common),
    /// Check partitions of unity and cap overlap.
    DecomposeCheck(Common),
    /// Pullback Cauchy differences over dyadic times, with a free control run.
    Scattering(Common),
    /// Print every configuration key with its default value.
    Defaults,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let (common, f): (Common, fn(&RunConfig, &Output) -> Result<report::Summary, CliError>) = match cli.command {
        Command::Simulate(c) => (c, commands::simulate),
        Command::ResonanceScan(c) => (c, commands::resonance_scan),
        Command::VerifyAlgebra(c) => (c, commands::verify_algebra),
        Command::VerifyKernel(c) => (c, commands::verify_kernel),
        Command::Trilinear(c) => (c, commands::trilinear),
        Command::DecomposeCheck(c) => (c, commands::decompose),
        Command::Scattering(c) => (c, commands::scattering),
        Command::Defaults => {
            print!("{}", RunConfig::defaults().to_text());
            return Ok(true);
        }
    };
    let text = match &common.config {
        Some(p) => Some(std::fs::read_to_string(p).map_err(config::ConfigError::Io)?),
        None => None,
    };
    let cfg = RunConfig::resolve(text.as_deref(), &common.overrides)?;
    if let Some(n) = std::env::var("DKG_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = Output::create(&common.out)?;
    out.text("config.resolved", &cfg.to_text())?;
    let summary = f(&cfg, &out)?;
    out.json("summary.json", &summary)?;
    summary.print();
    Ok(summary.pass)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
