//! `cliffym` — numerical verification campaigns for Clifford-algebra
//! frame fields, their flat connections, and covariantly constant
//! Yang-Mills solutions.
//!
//! Exit codes: 0 every check passed, 1 at least one check failed,
//! 2 configuration or internal error.

mod campaign;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::CampaignConfig;

#[derive(Parser)]
#[command(
    name = "cliffym",
    version,
    about = "Verify Clifford frame fields, flat connections, and Yang-Mills solutions",
    after_help = "Configs are JSON (see crates/cli/configs/); every flag overrides the \
                  corresponding config field. Reports are deterministic per (config, seed)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON campaign config; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// RNG seed for fixtures and sample points.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Sample points per case.
    #[arg(long, global = true, value_name = "N")]
    points: Option<usize>,

    /// Algebra signature as p,q.
    #[arg(long, global = true, value_name = "P,Q", value_parser = parse_pair)]
    sig: Option<(u8, u8)>,

    /// Base-space signature as k,l.
    #[arg(long, global = true, value_name = "K,L", value_parser = parse_pair)]
    base: Option<(u8, u8)>,

    /// Comma-separated sigma values for the one-parameter solution family.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    sigma: Option<Vec<f64>>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Also write per-point residuals as CSV (next to --out, or report.csv).
    #[arg(long, global = true)]
    csv: bool,

    /// Run with exact rational arithmetic (algebras up to four generators).
    #[arg(long, global = true)]
    exact: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check frame-field fixtures: anticommutation, completeness, gauge scalars.
    ValidateFrame,
    /// Check the connection: defining equation, flatness, formula equivalence.
    Connection,
    /// Check Yang-Mills solutions: field equations, conservation, gauge invariance.
    Yangmills,
    /// Run all three stages.
    All,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ValidateFrame => "validate-frame",
            Command::Connection => "connection",
            Command::Yangmills => "yangmills",
            Command::All => "all",
        }
    }
}

fn parse_pair(s: &str) -> std::result::Result<(u8, u8), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated integers, got `{s}`"))?;
    let a = a.trim().parse::<u8>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<u8>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

fn effective_config(cli: &Cli) -> Result<CampaignConfig> {
    let mut config = match &cli.config {
        Some(path) => CampaignConfig::load(path)?,
        None => CampaignConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(points) = cli.points {
        config.points = points;
    }
    if let Some(sig) = cli.sig {
        config.signature = sig;
    }
    if let Some(base) = cli.base {
        config.base = base;
    }
    if let Some(sigmas) = &cli.sigma {
        config.sigmas = sigmas.clone();
    }
    if cli.exact {
        config.exact = true;
    }
    config.validate()?;
    Ok(config)
}

fn csv_path(cli: &Cli) -> PathBuf {
    match &cli.out {
        Some(out) => out.with_extension("csv"),
        None => PathBuf::from("report.csv"),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let config = effective_config(cli)?;
    let command = cli.command.name();
    let started = Instant::now();
    let (report, csv_rows) = campaign::run(command, &config)?;
    let elapsed = started.elapsed();

    let json = serde_json::to_string_pretty(&report).context("serializing report")? + "\n";
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &json)
                .with_context(|| format!("writing report to {}", path.display()))?;
        }
        None => {
            std::io::stdout()
                .write_all(json.as_bytes())
                .context("writing report to stdout")?;
        }
    }
    if cli.csv {
        let path = csv_path(cli);
        let mut text = String::from(campaign::CsvRow::HEADER);
        text.push('\n');
        for row in &csv_rows {
            text.push_str(&row.to_line());
            text.push('\n');
        }
        std::fs::write(&path, text)
            .with_context(|| format!("writing CSV to {}", path.display()))?;
    }

    // Human summary on stderr: timings live here only, so the structured
    // report stays byte-identical for a given (config, seed).
    let mut err = std::io::stderr().lock();
    for stage in &report.stages {
        let skipped = stage.cases.iter().filter(|c| c.skipped.is_some()).count();
        writeln!(
            err,
            "{} {}: {} case(s), {} skipped",
            if stage.pass { "PASS" } else { "FAIL" },
            stage.stage,
            stage.cases.len(),
            skipped
        )?;
        for case in &stage.cases {
            for check in case.checks.iter().filter(|c| !c.pass) {
                writeln!(
                    err,
                    "  FAIL {} / {}: max residual {:.3e} exceeds tolerance {:.3e} at {:?}",
                    case.label, check.name, check.max_residual, check.tolerance, check.worst_point
                )?;
            }
        }
    }
    writeln!(
        err,
        "{} `{}` ({} scalar) in {:.1?}",
        if report.pass { "PASS" } else { "FAIL" },
        command,
        report.scalar,
        elapsed
    )?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
