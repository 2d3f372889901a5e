use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use corner_mass_cli::config::threads_from_env;
use corner_mass_cli::{exit, run, CliError, Command, RunConfig, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Constraint densities and dominant energy margins of a scenario
    Constraints,
    /// Spacetime harmonic mass bound with grid convergence study
    Massbound,
    /// Quasilocal masses, extension chain and comparison checks
    Quasilocal,
    /// Fill-in certificate sweep over H - f
    Certificate,
    /// Golden regression suite over the acceptance criteria
    Regress,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Constraints => Command::Constraints,
            Cmd::Massbound => Command::Massbound,
            Cmd::Quasilocal => Command::Quasilocal,
            Cmd::Certificate => Command::Certificate,
            Cmd::Regress => Command::Regress,
        }
    }
}

const AFTER_HELP: &str = "\
Exit codes: 0 success or verdict pass, 1 verdict fail, 2 config error, 3 numerical failure.

CSV columns (written to [output] csv, header row, ',' separator, '.' decimal):
  constraints  patch,r,scalar_curvature,mu,j_radial,dec_margin
  massbound    resolution,slack,theorem_slack,lhs,bulk,corner,inner,delta_variation
  quasilocal   r,f,Q                     (extension profile)
  certificate  h_minus_f,h,e_ext,margin,certified

CORNER_MASS_THREADS caps the worker threads of resolution and parameter sweeps.";

/// Laboratory for initial data sets with corners.
#[derive(Debug, Parser)]
#[command(name = "corner-mass", version, after_help = AFTER_HELP)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// Run config (`[section]` headers, `key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// JSON report path; overrides `[output] report`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit timing so reruns are byte-identical
    #[arg(long)]
    deterministic: bool,
    /// Run only regression criteria whose name contains NAME
    #[arg(long, value_name = "NAME")]
    filter: Option<String>,
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Output { path: path.display().to_string(), message: e.to_string() })
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    let config = RunConfig::load(&cli.config)?;
    let options = RunOptions { deterministic: cli.deterministic, filter: cli.filter.clone(), threads: threads_from_env()? };
    let command = Command::from(cli.command);
    let outcome = run(command, &config, &options)?;
    let json = outcome.envelope.to_json()?;
    let report = cli.out.clone().or_else(|| config.output.report.as_deref().map(|p| config.resolve(p)));
    if let Some(table) = &outcome.table {
        print!("{table}");
        if let Some(path) = &report {
            write(path, &json)?;
        }
    } else if let Some(path) = &report {
        write(path, &json)?;
    } else {
        print!("{json}");
    }
    if let (Some(csv), Some(path)) = (&outcome.csv, &config.output.csv) {
        csv.write(&config.resolve(path))?;
    }
    Ok(if outcome.envelope.verdict.passed { exit::SUCCESS } else { exit::VERDICT_FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("corner-mass: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
