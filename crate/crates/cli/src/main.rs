use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use d2d_coopnet_cli::{commands, validate, CliError, Report, SystemConfig};

#[derive(Parser)]
#[command(name = "d2d-coopnet", version, about = "Cache-enabled D2D network analysis and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form quantities per cluster size.
    Analyze(Common),
    /// Monte Carlo run at the configured or optimal operating point.
    Simulate(Common),
    /// Per-K table at each optimal split, best row flagged.
    Optimize(Common),
    /// Analytic results against simulation and brute force.
    Validate(Common),
    /// Simulate once per value of one config key.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    sweep_key: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("D2D_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("D2D_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), CliError> {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let write = |w: &mut dyn Write| report.table.write(w).map_err(|e| io::Error::other(e.to_string()));
    match out {
        Some(path) => write(&mut BufWriter::new(File::create(path)?))?,
        None => write(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (common, report) = match &cli.command {
        Command::Analyze(c) => (c, commands::analyze(&SystemConfig::from_path(&c.config)?)?),
        Command::Simulate(c) => (c, commands::simulate(&SystemConfig::from_path(&c.config)?)?),
        Command::Optimize(c) => (c, commands::optimize(&SystemConfig::from_path(&c.config)?)?),
        Command::Validate(c) => (c, validate::validate(&SystemConfig::from_path(&c.config)?)?),
        Command::Sweep(s) => {
            let cfg = SystemConfig::from_path(&s.common.config)?;
            (&s.common, commands::sweep(&cfg, &s.sweep_key, &s.values)?)
        }
    };
    emit(&report, common.out.as_ref())?;
    Ok(report.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
