use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coop_noma::experiment::run_experiment;
use coop_noma::output::{emit_csv, emit_plot};
use coop_noma::scenario::{parse_scenario, ScenarioConfig};
use coop_noma::sim::MonteCarloConfig;
use coop_noma::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "coop-noma", version, about = "Cooperative NOMA Monte-Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scheme and metric of a scenario file and write the results table.
    Run(RunArgs),
    /// Print a scenario with every default filled in.
    Show {
        scenario: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file (TOML).
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Directory receiving the CSV (and SVG) output.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write an SVG plot; the file name is relative to the output directory.
    #[arg(long, num_args = 0..=1, default_missing_value = "results.svg")]
    plot: Option<String>,
    /// Comma-separated scheme identifiers replacing the file's list.
    #[arg(long)]
    schemes: Option<String>,
    /// Worker threads (1 runs sequentially).
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        if err.is_validation() {
            Failure::Validation(err.to_string())
        } else {
            Failure::Runtime(err.to_string())
        }
    }
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read scenario {}: {e}", path.display())))?;
    Ok(parse_scenario(&text)?)
}

fn apply_overrides(cfg: &mut ScenarioConfig, args: &RunArgs) -> Result<(), Error> {
    if let Some(list) = &args.schemes {
        cfg.set_schemes(list)?;
    }
    let mc = &cfg.monte_carlo;
    cfg.monte_carlo = MonteCarloConfig::new(
        args.trials.unwrap_or(mc.trials),
        args.seed.unwrap_or(mc.master_seed),
        args.workers.unwrap_or(mc.workers),
    )?;
    if let Some(dir) = &args.out_dir {
        cfg.output.dir = dir.clone();
    }
    if let Some(plot) = &args.plot {
        cfg.output.plot = Some(plot.clone());
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = load(&args.scenario)?;
    apply_overrides(&mut cfg, &args)?;

    let curves = run_experiment(&cfg)?;
    for curve in &curves {
        for (i, low) in curve.low_event_points.iter().enumerate() {
            if *low {
                eprintln!(
                    "warning: {} {} at {} dB has fewer than 10 outage events; its interval is unreliable",
                    curve.label,
                    curve.metric.name(),
                    curve.snr_db[i]
                );
            }
        }
    }

    let csv_path = cfg.output.dir.join(&cfg.output.csv);
    emit_csv(&curves, &csv_path)?;
    println!("wrote {}", csv_path.display());
    if let Some(plot) = &cfg.output.plot {
        let svg_path = cfg.output.dir.join(plot);
        emit_plot(&curves, &svg_path)?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Show { scenario } => load(&scenario).map(|cfg| print!("{}", cfg.to_toml())),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
