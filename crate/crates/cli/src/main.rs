//! `mmdf`: experiment harness around `mmdf-core`.
//!
//! Exit codes: 0 all checks pass, 1 a bound or tolerance was violated, 2 configuration or
//! input error, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod io;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Origin, RawConfig};
use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "mmdf", version, about = "Degrees-of-freedom experiments for radial kernels")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for every randomized step; recorded in each CSV.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory (default `results`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for parallel sweeps; output order does not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the moment identities of the weight functions.
    MomentCheck,
    /// Sweep lambda: maximal and effective degrees of freedom against their bounds.
    DofSweep,
    /// Approximation errors of the moment weights against both error bounds.
    ApproxError,
    /// Legendre coefficients of the profile, decay bounds and classification.
    Decay,
    /// Nyström versus full kernel ridge regression on a regression task.
    NystromBench,
    /// Min-characterization identity of the pointwise degrees of freedom.
    VerifyIdentity,
    /// Render a result CSV as an SVG chart.
    Plot {
        csv: PathBuf,
        /// Chart layout; defaults to the command recorded in the CSV.
        #[arg(long)]
        kind: Option<String>,
    },
    /// List configuration keys with their defaults and environment variable names.
    Keys,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut raw = RawConfig::default();
    if let Some(p) = &cli.config {
        raw.merge_file(p)?;
    }
    raw.merge_env(|name| std::env::var(name).ok())?;
    for s in &cli.set {
        raw.merge_set(s)?;
    }
    if let Some(seed) = cli.seed {
        raw.set("seed", &seed.to_string(), Origin::Flag)?;
    }
    if let Some(out) = &cli.out {
        let out = out
            .to_str()
            .ok_or_else(|| CliError::Config("--out must be valid UTF-8".into()))?;
        raw.set("out", out, Origin::Flag)?;
    }
    ExperimentConfig::from_raw(&raw)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    if let Command::Keys = cli.command {
        for (k, v) in config::KEYS {
            println!("{k:<28} {:<28} {}", if v.is_empty() { "(unset)" } else { v }, config::env_name(k));
        }
        return Ok(());
    }
    let cfg = resolve(&cli)?;
    let report = match &cli.command {
        Command::MomentCheck => commands::moment_check(&cfg)?,
        Command::DofSweep => commands::dof_sweep(&cfg)?,
        Command::ApproxError => commands::approx_error(&cfg)?,
        Command::Decay => commands::decay(&cfg)?,
        Command::NystromBench => commands::nystrom_bench(&cfg)?,
        Command::VerifyIdentity => commands::verify_identity(&cfg)?,
        Command::Plot { csv, kind } => {
            let path = commands::plot(csv, kind.as_deref(), &cfg.out)?;
            println!("wrote {}", path.display());
            return Ok(());
        }
        Command::Keys => unreachable!(),
    };
    let path = report.table.write(&cfg.out, &report.file)?;
    println!("wrote {} ({} rows)", path.display(), report.table.len());
    for n in &report.notes {
        println!("{n}");
    }
    if report.violations.is_empty() {
        return Ok(());
    }
    const SHOWN: usize = 10;
    for v in report.violations.iter().take(SHOWN) {
        eprintln!("violation: {v}");
    }
    if report.violations.len() > SHOWN {
        eprintln!("... {} more", report.violations.len() - SHOWN);
    }
    Err(CliError::Violation(format!("{} check(s) failed", report.violations.len())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
