//! `tfnuclear`: batch front end for the weight, Gabor, mixed-norm, Köthe and
//! Komatsu verifiers.
//!
//! Every command reads an optional JSON config, writes `report.json` plus
//! CSV tables into `--out`, and reports its verdict through the exit code:
//! 0 success, 1 condition failure, 2 config error, 3 inconclusive,
//! 4 internal inconsistency.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{CliError, Context};

#[derive(Parser)]
#[command(name = "tfnuclear", version, about = "Numerical verifiers for weighted time-frequency spaces")]
struct Cli {
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Weight function conditions.
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Gabor frame pipeline.
    #[command(subcommand)]
    Gabor(GaborCmd),
    /// Phase-plane inequalities.
    #[command(subcommand)]
    Grid(GridCmd),
    /// Köthe matrix summability.
    #[command(subcommand)]
    Koethe(KoetheCmd),
    /// Komatsu sequence conditions.
    #[command(subcommand)]
    Komatsu(KomatsuCmd),
}

#[derive(Subcommand)]
enum WeightsCmd {
    /// Certify (alpha), (gamma), the little-o condition and tabulate the Young conjugate.
    Check(Common),
}

#[derive(Subcommand)]
enum GaborCmd {
    /// Analysis followed by synthesis with the canonical dual.
    Roundtrip(Common),
    /// Weighted decay of the analysis coefficients.
    Decay(Common),
}

#[derive(Subcommand)]
enum GridCmd {
    /// Weighted Young, amalgam and sampling inequalities on random pairs.
    Young(Common),
}

#[derive(Subcommand)]
enum KoetheCmd {
    /// Grothendieck-Pietsch summability per k.
    Gp(Common),
}

#[derive(Subcommand)]
enum KomatsuCmd {
    /// Precondition chain and nuclearity verdict.
    Verdict(Common),
    /// Hermite coefficient decay and derivative seminorms.
    Hermite(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json and CSV tables.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized trial sets; overrides the config's "seed".
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, run): (&str, &Common, commands::Command) = match &cli.group {
        Group::Weights(WeightsCmd::Check(c)) => ("weights check", c, commands::weights::check),
        Group::Gabor(GaborCmd::Roundtrip(c)) => ("gabor roundtrip", c, commands::gabor::roundtrip),
        Group::Gabor(GaborCmd::Decay(c)) => ("gabor decay", c, commands::gabor::decay),
        Group::Grid(GridCmd::Young(c)) => ("grid young", c, commands::grid::young),
        Group::Koethe(KoetheCmd::Gp(c)) => ("koethe gp", c, commands::koethe::gp),
        Group::Komatsu(KomatsuCmd::Verdict(c)) => ("komatsu verdict", c, commands::komatsu::verdict),
        Group::Komatsu(KomatsuCmd::Hermite(c)) => ("komatsu hermite", c, commands::komatsu::hermite),
    };
    match execute(name, common, run) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(name: &str, common: &Common, run: commands::Command) -> Result<u8, CliError> {
    let (params, expect, seed) = config::load(common.config.as_deref(), common.seed)?;
    let ctx = Context::new(common.config.as_deref(), &common.out, seed);
    let outcome = run(&params, &ctx)?;
    config::finish(name, &ctx, params, expect, outcome)
}
