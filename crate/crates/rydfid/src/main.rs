use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rydfid::acceptance;
use rydfid::commands::{run_estimate, run_gate_search, run_simulate};
use rydfid::figures::{reproduce, FIGURES};
use rydfid::output::{write_json, Meta};
use rydfid::{CliError, Config, Result};

#[derive(Parser)]
#[command(name = "rydfid", version, about = "Motional and radiative error budgets for Rydberg blockade gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration; defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Smaller grids; for validate, only the analytic and small-basis checks
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form error budget over the configured scan
    Estimate,
    /// Full motional dynamics over the configured scan
    Simulate,
    /// Search detuning ratio and pulse width for a C_Z phase
    GateSearch,
    /// Regenerate a figure or the adiabatic-gate table
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        name: String,
    },
    /// Run the acceptance checks and print target, actual and tolerance
    Validate,
}

fn load(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = load(cli.config.as_deref())?;
    let files = match &cli.command {
        Command::Estimate => run_estimate(&config, &cli.out, cli.jobs)?,
        Command::Simulate => run_simulate(&config, &cli.out, cli.jobs)?,
        Command::GateSearch => run_gate_search(&config, &cli.out)?,
        Command::Reproduce { name } => reproduce(name, &config, cli.quick, cli.jobs)?.write(&cli.out, &config.hash())?,
        Command::Validate => {
            let checks = acceptance::run(&config, cli.quick, cli.jobs)?;
            print!("{}", acceptance::render(&checks));
            let path = cli.out.join("validate.json");
            write_json(&path, &Meta::new("validate", &config.hash()), &serde_json::json!({ "checks": checks }))?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
            if !failed.is_empty() {
                return Err(CliError::Validation(failed.join(", ")));
            }
            vec![path]
        }
    };
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
