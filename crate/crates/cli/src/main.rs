//! `netcap`: bounds tables, MI sweeps and self-checks from a config file.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use netcap_core::experiment::{parse_config, run, ExitStatus, Mode, RunOutput};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Bounds,
    Simulate,
    MiSweep,
    Verify,
    DistCheck,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bounds => Mode::Bounds,
            ModeArg::Simulate => Mode::Simulate,
            ModeArg::MiSweep => Mode::MiSweep,
            ModeArg::Verify => Mode::Verify,
            ModeArg::DistCheck => Mode::DistCheck,
        }
    }
}

/// Capacity bounds and Monte Carlo mutual information for fading interference networks.
///
/// Exit codes: 0 success, 1 configuration or precondition error,
/// 2 an MI estimate exceeds a bound, 3 a verification check failed.
#[derive(Debug, Parser)]
#[command(name = "netcap", version)]
struct Cli {
    /// What to run.
    #[arg(value_enum)]
    mode: ModeArg,

    /// Experiment config (`key = value` lines).
    #[arg(long, short)]
    config: PathBuf,

    /// Overrides `network.seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// CSV destination; overrides `outputs.csv`.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn execute(cli: &Cli) -> Result<ExitStatus> {
    let text = fs::read_to_string(&cli.config).with_context(|| format!("reading {}", cli.config.display()))?;
    let mut cfg = parse_config(&text).with_context(|| format!("in {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        cfg.network.seed = seed;
    }
    let mode = Mode::from(cli.mode);

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.workers {
        pool = pool.num_threads(k.max(1));
    }
    let pool = pool.build().context("starting worker pool")?;
    let RunOutput { report, csv, status } = pool.install(|| run(&cfg, mode))?;

    let csv_path = cli.out.clone().or_else(|| cfg.outputs.csv.as_ref().map(PathBuf::from));
    let report_path = cfg.outputs.report.as_ref().map(PathBuf::from);
    let csv_is_primary = matches!(mode, Mode::MiSweep | Mode::Simulate);

    match (&csv, &csv_path) {
        (Some(c), Some(p)) => write_file(p, c)?,
        (Some(c), None) if csv_is_primary && report_path.is_none() => {
            eprint!("{report}");
            print!("{c}");
            return Ok(status);
        }
        _ => {}
    }
    match report_path {
        Some(p) => write_file(&p, &report)?,
        None => print!("{report}"),
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(status) => ExitCode::from(status.code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ExitStatus::ConfigError.code() as u8)
        }
    }
}
