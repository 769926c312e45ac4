//! `splitbound`: certify drift conditions, simulate split chains and check
//! tail bounds against Monte Carlo, all driven by one JSON config.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Failure;

#[derive(Parser)]
#[command(name = "splitbound", version, about = "Split-chain tail bounds: certify, simulate, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config's replica count.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Output directory (created if missing); defaults to the config's `out` or `.`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check drift and minorization numerically and compute the block norms.
    Certify,
    /// Simulate split chains and write regeneration ledgers.
    Simulate,
    /// Compare the empirical tail of |S_n - n pi(g)| with a bound curve.
    Verify,
    /// Choose the small-set edge x* for the log-concave example.
    Scan,
    /// Merge the tails of several verify runs.
    Report,
}

fn run(cli: Cli) -> Result<String, Failure> {
    let path = cli.config.ok_or_else(|| Failure::Config("--config is required".into()))?;
    let mut cfg = config::load(&path).map_err(Failure::Config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(r) = cli.replicas {
        cfg.replicas = Some(r);
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let out = cli.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    match cli.command {
        Command::Certify => commands::certify(&cfg, &out),
        Command::Simulate => commands::simulate(&cfg, cfg.replicas.unwrap_or(1), &out),
        Command::Verify => {
            let r = cfg.replicas.ok_or_else(|| Failure::Config("config is missing `replicas`".into()))?;
            commands::verify(&cfg, r, &out)
        }
        Command::Scan => commands::scan(&cfg, &out),
        Command::Report => commands::report(&cfg, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
