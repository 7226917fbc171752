use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lpfock::cli::{fock_crossed_report, fock_cuntz_report, run, write_reports, ExperimentConfig, OUT_DIR_ENV};
use lpfock::error::{Error, Result};
use lpfock::exponent::PExponent;
use lpfock::fock::crossed::DynSystem;

#[derive(Parser)]
#[command(name = "lpfock", version, about = "Lp-module and Lp-Fock experiments")]
struct Cli {
    /// Experiment config (TOML). Required when no subcommand is given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the environment and the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Base seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the grid in `--config`.
    Run,
    /// Truncated Cuntz-type Fock representation report.
    FockCuntz {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Truncated crossed-product Fock representation report.
    FockCrossed {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn sweep(cli: &Cli) -> Result<bool> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config {
        field: "config".into(),
        message: "--config is required".into(),
    })?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.output.dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let records = run(&cfg, cli.jobs)?;
    let (jsonl, csv) = write_reports(&records, &dir, &cfg.stem())?;
    let failed = records.iter().filter(|r| !r.pass).count();
    eprintln!(
        "{}: {} points, {} failed -> {} {}",
        cfg.kind.name(),
        records.len(),
        failed,
        jsonl.display(),
        csv.display()
    );
    Ok(failed == 0)
}

fn execute(cli: &Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or(0);
    let (pass, report) = match &cli.command {
        None | Some(Command::Run) => return sweep(cli),
        Some(Command::FockCuntz { d, levels, p }) => {
            let (pass, _, report) = fock_cuntz_report(*d, *levels, *p, seed, 1e-12, 1e-3)?;
            (pass, report)
        }
        Some(Command::FockCrossed { algebra, phi, levels, p }) => {
            let sys = DynSystem::from_json(&read(algebra)?, &read(phi)?, PExponent::new(*p)?)?;
            let (pass, _, report) = fock_crossed_report(sys, *levels, seed, 1e-12, 1e-3)?;
            (pass, report)
        }
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report)?);
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
