use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hyco::config::{load_config, preset_toml, validate, RunConfig};
use hyco::io::{read_summary, write_compare};
use hyco::run::{execute, RunSpec};
use hyco::CliError;
use hyco_core::experiments::preset;
use hyco_core::hyco::{GhostMode, Method, WallClock};

#[derive(Parser)]
#[command(
    name = "hyco",
    version,
    about = "Hybrid cooperative training of PDE solvers and neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum MethodArg {
    Hyco,
    PhysicsOnly,
    NnOnly,
    Pinn,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Hyco => Method::Hyco,
            MethodArg::PhysicsOnly => Method::PhysicsOnly,
            MethodArg::NnOnly => Method::NnOnly,
            MethodArg::Pinn => Method::Pinn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum GhostArg {
    PerEpoch,
    Fixed,
}

#[derive(Subcommand)]
enum Command {
    /// Train one method on a preset or config file.
    Run {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory; defaults to `runs/<scenario>_<method>_s<seed>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long, value_enum)]
        ghost_mode: Option<GhostArg>,
        /// Parallel finite-difference gradient solves.
        #[arg(long)]
        parallel: bool,
    },
    /// Merge finished runs into one comparison table.
    Compare {
        #[arg(required = true, num_args = 2..)]
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "compare.csv")]
        out: PathBuf,
    },
    /// Parse and check a config file without running anything.
    Validate { config: PathBuf },
    /// Print the fully resolved TOML of a named preset.
    Preset { name: String },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run {
            preset: name,
            config,
            method,
            seed,
            out,
            epochs,
            ghost_mode,
            parallel,
        } => {
            let RunConfig {
                preset: mut p,
                method: cfg_method,
            } = match (name, config) {
                (Some(name), _) => RunConfig {
                    preset: preset(&name).map_err(|e| CliError::Config(e.to_string()))?,
                    method: None,
                },
                (None, Some(path)) => load_config(&path)?,
                (None, None) => unreachable!("clap requires one of --preset/--config"),
            };
            if let Some(seed) = seed {
                p.train.seed = seed;
            }
            if let Some(epochs) = epochs {
                p.train.epochs = epochs;
                p.scenario.pinn.epochs = epochs;
            }
            if let Some(g) = ghost_mode {
                p.train.ghost_mode = match g {
                    GhostArg::PerEpoch => GhostMode::PerEpoch,
                    GhostArg::Fixed => GhostMode::Fixed,
                };
            }
            p.train.parallel |= parallel;
            validate(&p)?;
            let method = method
                .map(Method::from)
                .or(cfg_method)
                .unwrap_or(Method::Hyco);
            let out = out.unwrap_or_else(|| {
                PathBuf::from("runs").join(format!(
                    "{}_{}_s{}",
                    p.scenario.name,
                    method.name(),
                    p.train.seed
                ))
            });
            let spec = RunSpec {
                preset: p,
                method,
                out,
            };
            let outcome = execute(&spec, &WallClock::start())?;
            let s = &outcome.summary;
            let m = s.metrics;
            println!(
                "{} on {} ({}): {} epochs in {:.2}s, e_d={} e_s={} e_p={} -> {}",
                s.method,
                s.scenario,
                s.region,
                s.epochs_run,
                s.time_s,
                fmt(m.map(|m| m.e_d)),
                fmt(m.map(|m| m.e_s)),
                fmt(m.and_then(|m| m.e_p)),
                spec.out.display()
            );
            Ok(())
        }
        Command::Compare { runs, out } => {
            let summaries = runs
                .iter()
                .map(|d| read_summary(d))
                .collect::<Result<Vec<_>, _>>()?;
            write_compare(&out, &summaries)?;
            println!("{} runs -> {}", summaries.len(), out.display());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!("{}: ok ({})", config.display(), cfg.preset.scenario.name);
            Ok(())
        }
        Command::Preset { name } => {
            let p = preset(&name).map_err(|e| CliError::Config(e.to_string()))?;
            print!("{}", preset_toml(&p));
            Ok(())
        }
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into())
}
