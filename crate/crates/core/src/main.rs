use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use kzfront::cli::{self, Mode};

#[derive(Parser)]
#[command(name = "kzfront", version, about = "Inhomogeneous quenches of the transverse-field Ising chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state of a static front: magnetization profile and spectrum
    Static(RunArgs),
    /// Single moving-front or ramp quench
    Quench(RunArgs),
    /// Quench for every point of a parameter grid
    Scan(RunArgs),
    /// Analytic Landau-Zener and Kibble-Zurek densities
    Predict(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (key = value lines)
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path, overriding `out` from the config
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker count, overriding `jobs` from the config
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (mode, args) = match cli.command {
        Command::Static(a) => (Mode::Static, a),
        Command::Quench(a) => (Mode::Quench, a),
        Command::Scan(a) => (Mode::Scan, a),
        Command::Predict(a) => (Mode::Predict, a),
    };
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = cli::parse_config_with_mode(&text, Some(mode))
        .with_context(|| format!("in {}", args.config.display()))?;
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        config.jobs = jobs;
    }
    let out = args
        .out
        .or_else(|| config.out.clone())
        .context("no output path: set `out` in the config or pass --out")?;

    let start = Instant::now();
    let tables = cli::execute(&config)?;
    let written = cli::write_outputs(&tables, &out)?;
    for (path, table) in written.iter().zip(&tables) {
        eprintln!("wrote {} ({} rows)", path.display(), table.rows.len());
    }
    eprintln!("done in {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
