//! `gwsim`: run, validate and list scenario configs.
//!
//! Exit codes: 0 success, 2 invalid config, 3 numerical or physical
//! failure (step size, bound, convergence), 4 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gwmatter::scenario::{builtin, run_scenario, Scenario, BUILTIN};
use gwmatter::Error;

#[derive(Parser)]
#[command(name = "gwsim", version, about = "Energy transfer from a gravitational wave to matter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (a JSON file, or the name of a built-in scenario).
    Run {
        config: String,
        /// Output directory; results go to `<out>/<name>/`.
        #[arg(long, env = "GWSIM_OUT", default_value = "out")]
        out: PathBuf,
        /// Worker threads for sweep points.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse and check a scenario without running it.
    Validate { config: String },
    /// List the built-in scenarios.
    ListScenarios,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) | Error::UnknownDimension(_) | Error::Schema(_) | Error::Json(_) => 2,
        Error::Io(_) => 4,
        Error::StepSize { .. }
        | Error::Relativistic { .. }
        | Error::BoundViolation { .. }
        | Error::Invariant(_)
        | Error::NoConvergence { .. }
        | Error::Numerical(_) => 3,
    }
}

fn load(config: &str) -> Result<String, Error> {
    let path = PathBuf::from(config);
    if path.exists() {
        return Ok(std::fs::read_to_string(path)?);
    }
    builtin(config)
        .map(str::to_owned)
        .ok_or_else(|| Error::InvalidInput(format!("no config file or built-in scenario named `{config}`")))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out, workers } => {
            let raw = load(&config)?;
            let scenario = Scenario::from_json(&raw)?;
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
            let result = run_scenario(&scenario, &raw, Some(&out), workers)?;
            for p in &result.points {
                let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:e}"));
                println!(
                    "{}: value={} dE={} bound={} max|dE/dt|/bound={}",
                    result.name,
                    fmt(p.value),
                    fmt(p.energy_change),
                    fmt(p.integrated_bound),
                    fmt(p.max_bound_ratio)
                );
            }
            if let Some(fit) = &result.fit {
                println!("{}: fit {}", result.name, serde_json::to_string(fit)?);
            }
            if result.points.iter().all(|p| p.energy_change.is_none()) {
                for p in &result.points {
                    println!("{}", serde_json::to_string_pretty(&p.details)?);
                }
            }
            println!("{}: config {} -> {}", result.name, result.config_hash, out.join(&result.name).display());
        }
        Command::Validate { config } => {
            let raw = load(&config)?;
            let s = Scenario::from_json(&raw)?;
            println!("{}: ok ({} backend, {} point(s))", s.name, s.backend.kind(), s.sweep_values()?.len());
        }
        Command::ListScenarios => {
            for (name, raw) in BUILTIN {
                let desc = Scenario::from_json(raw).map(|s| s.description).unwrap_or_else(|e| format!("invalid: {e}"));
                println!("{name:24} {desc}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gwsim: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
