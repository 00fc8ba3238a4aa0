use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cvmem_cli::{run, CliError, Overrides, RunSettings, Scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "cvmem", version, about = "Pulsed continuous-variable quantum memory scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its CSV/JSON output.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    scenario: Option<Scenario>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Half-width of the time window in units of T.
    #[arg(long)]
    span: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// Pulse area gamma_tilde0 * T.
    #[arg(long = "gt0T")]
    gt0t: Option<f64>,
}

fn execute(args: RunArgs) -> Result<(), CliError> {
    let cfg = match &args.config {
        Some(path) => ScenarioConfig::from_file(path)?,
        None => ScenarioConfig::default(),
    };
    let overrides = Overrides {
        scenario: args.scenario,
        out_dir: args.out_dir,
        grid_points: args.grid_points,
        span: args.span,
        r: args.r,
        eta: args.eta,
        gt0t: args.gt0t,
    };
    let settings = RunSettings::resolve(cfg, overrides)?;
    let outcome = run(&settings)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.summary).expect("summary serialises")
    );
    match outcome.failure {
        Some(msg) => Err(CliError::Tolerance(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let Command::Run(args) = Cli::parse().command;
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
