use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pmc_core::adapter::ForceMode;
use pmc_core::scenario::{build_scenario, run, RunConfig, RunOptions, ScenarioError, SCENARIOS};

#[derive(Parser)]
#[command(name = "pmc", version, about = "Coupled SPH / finite-element benchmark runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run(RunArgs),
    /// Check a configuration file and print it with defaults filled in.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the built-in scenario names.
    ListScenarios,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long, conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario with default settings.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    end_time: Option<f64>,
    /// Coupling window length (s).
    #[arg(long)]
    dt_window: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    write_interval: Option<f64>,
    #[arg(long, value_parser = |s: &str| s.parse::<ForceMode>())]
    force_mode: Option<ForceMode>,
    /// Seed for jittering the initial lattice.
    #[arg(long)]
    seed: Option<u64>,
    /// Initial particle spacing (m).
    #[arg(long)]
    spacing: Option<f64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
}

fn load(path: &PathBuf) -> Result<RunConfig, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.clone(),
        source,
    })?;
    RunConfig::from_json(&text)
}

fn config_for(args: &RunArgs) -> Result<RunConfig, ScenarioError> {
    let mut cfg = match (&args.config, &args.scenario) {
        (Some(path), _) => load(path)?,
        (None, Some(name)) => {
            let sc = build_scenario(name)?;
            let dir = PathBuf::from("output").join(name);
            RunConfig::for_scenario(sc, dir)
        }
        (None, None) => return Err(ScenarioError::Config("either --config or --scenario is required".into())),
    };
    if let Some(t) = args.end_time {
        cfg.set_end_time(t);
    }
    if let Some(dt) = args.dt_window {
        cfg.coupling.scheme.window_dt = dt;
    }
    if let Some(dir) = &args.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(w) = args.write_interval {
        cfg.write_interval = w;
    }
    if let Some(m) = args.force_mode {
        cfg.force_mode = m;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if let Some(dx) = args.spacing {
        cfg.scenario.spacing = dx;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_command(args: &RunArgs) -> Result<(), ScenarioError> {
    let cfg = config_for(args)?;
    let workers = args
        .workers
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()));
    let summary = run(&cfg, &RunOptions { workers })?;
    println!(
        "{}: {} windows to t = {} s in {:.1} s ({} fluid particles), outputs in {}",
        cfg.scenario.name,
        summary.windows,
        summary.final_time,
        summary.wall_time,
        summary.fluid_particles,
        summary.output_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run_command(args),
        Command::ValidateConfig { config } => load(config).map(|cfg| println!("{}", cfg.to_json())),
        Command::ListScenarios => {
            for name in SCENARIOS {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
