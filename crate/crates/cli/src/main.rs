use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use focal_forge::io::{run_experiment, scenarios, ConfigError, ExperimentConfig, Operation, RunError};

/// Seeded experiments on focal data, Morse indices and index splitting.
///
/// Exit codes: 0 clean run, 1 run with findings, 2 configuration error,
/// 3 failure to run.
#[derive(Parser)]
#[command(name = "focal-forge", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for reports and the run manifest.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Multiplies the integration and Newton tolerances.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Focal times over a loop of unit normals.
    Focal(Target),
    /// Morse index and nullity of normal geodesics.
    Index(Target),
    /// Vertical plus horizontal index against the full index on random geodesics.
    Split(Target),
    /// Critical points of an energy functional against reference Betti numbers.
    Taut(Target),
    /// Broken-geodesic sampling and dimension bookkeeping.
    Cycles(Target),
    /// Fiber integrability at focal vectors.
    Probe(Target),
    /// Print the registered scenarios.
    ListScenarios {
        /// Emit JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

#[derive(clap::Args)]
struct Target {
    /// Scenario id; required without `--config`.
    #[arg(long)]
    scenario: Option<String>,
}

fn config_for(cli: &Cli, op: Operation, target: &Target) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&cli.config, &target.scenario) {
        (Some(path), _) => ExperimentConfig::from_file(path)?,
        (None, Some(id)) => ExperimentConfig::new(id, op),
        (None, None) => {
            return Err(ConfigError {
                path: "scenario".into(),
                message: "pass --config or --scenario".into(),
            })
        }
    };
    if let Some(id) = &target.scenario {
        cfg.scenario = id.clone();
    }
    match cfg.operation {
        Some(o) if o != op => {
            return Err(ConfigError {
                path: "operation".into(),
                message: format!("config selects `{}` but the subcommand runs `{}`", o.name(), op.name()),
            })
        }
        _ => cfg.operation = Some(op),
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.tol_scale {
        cfg.scale_tolerances(f)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (op, target) = match &cli.command {
        Command::ListScenarios { json } => {
            if *json {
                println!("{}", serde_json::to_string_pretty(scenarios()).expect("registry serializes"));
            } else {
                for s in scenarios() {
                    println!("{:<18} {}", s.id, s.description);
                }
            }
            return ExitCode::SUCCESS;
        }
        Command::Focal(t) => (Operation::FocalScan, t),
        Command::Index(t) => (Operation::Index, t),
        Command::Split(t) => (Operation::Split, t),
        Command::Taut(t) => (Operation::TautCheck, t),
        Command::Cycles(t) => (Operation::Cycles, t),
        Command::Probe(t) => (Operation::FiberProbe, t),
    };
    let outcome = config_for(&cli, op, target)
        .map_err(RunError::Config)
        .and_then(|cfg| run_experiment(&cfg, cli.out_dir.as_deref()));
    match outcome {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            for f in &out.report.findings {
                println!("finding: {f}");
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
