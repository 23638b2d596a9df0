//! Thin command-line front end over the `cordon` library.
//!
//! Subcommands: `generate` a random scenario file, `select` remediation
//! zones with any method, `evaluate` a given placement with the agent-based
//! simulator, and `experiment` to run a whole method-comparison grid to CSV.
//!
//! Exit codes: 0 on success, 2 for invalid input (bad files, bad flags,
//! solver failures), 3 for structurally infeasible requests (budgets that
//! don't fit the network, search spaces over the exhaustive cap).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cordon::equilibrium::{dump_dual_system, MarkovParams};
use cordon::harness::{
    load_grid_str, run_selection, run_table_with, HarnessError, Method, MethodOptions,
    ScenarioFamily,
};
use cordon::network::{
    generate, load_scenario, save_scenario_to, GeneratorConfig, Mobility, NetworkError,
};
use cordon::placement::PlacementError;
use cordon::sim::{
    evaluate_placement, mix_seed, run_trial_observed, Location, SimConfig, DEFAULT_FINAL_TRIALS,
    DEFAULT_STEPS,
};
use cordon::Scenario;

#[derive(Parser)]
#[command(
    name = "cordon",
    about = "Place and evaluate malware remediation zones on a road network",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random connected scenario and write it as JSON.
    Generate {
        /// Number of towns.
        #[arg(long, default_value_t = 35)]
        n: usize,
        /// Number of enemy stronghold towns.
        #[arg(long, default_value_t = 5)]
        enemy: usize,
        /// Generator seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the scenario JSON.
        #[arg(long)]
        out: PathBuf,
        /// Number of mobile units.
        #[arg(long, default_value_t = 5)]
        units: usize,
        /// Remediation budget recorded in the file (informative).
        #[arg(long, default_value_t = 5)]
        budget: usize,
        /// Mobility model: walk | waypoint.
        #[arg(long, default_value = "walk")]
        mobility: String,
    },
    /// Choose remediation zones for a scenario; prints JSON to stdout.
    Select {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Selection method tag (e.g. dynsys-mc, pagerank-topk, exhaustive).
        #[arg(long)]
        method: String,
        /// Number of zones to place.
        #[arg(long)]
        k: usize,
        /// Seed for the method's randomness.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per round (Monte Carlo) or total samples (basic).
        #[arg(long)]
        mc_samples: Option<usize>,
        /// Simulation trials per objective evaluation (ABM methods).
        #[arg(long, default_value_t = cordon::sim::DEFAULT_EVAL_TRIALS)]
        eval_trials: usize,
        /// Simulation steps per objective evaluation (ABM methods).
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        eval_steps: usize,
    },
    /// Score a given placement with the agent-based simulator.
    Evaluate {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated town ids, e.g. "3,17,22". Empty for no zones.
        #[arg(long)]
        remediation: String,
        /// Number of simulation trials.
        #[arg(long, default_value_t = DEFAULT_FINAL_TRIALS)]
        trials: usize,
        /// Ticks per trial (one tick = 60 s).
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        /// Master seed; trial seeds are derived from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the linearized equilibrium system (matrix, solution)
        /// for this scenario and placement as CSV.
        #[arg(long)]
        dump_system: Option<PathBuf>,
        /// Also write a per-tick trace of the first trial as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a method-comparison grid and write the result table as CSV.
    Experiment {
        /// Grid description JSON file.
        #[arg(long)]
        grid: PathBuf,
        /// Output path for the CSV table.
        #[arg(long)]
        out: PathBuf,
        /// Override the family's town count.
        #[arg(long)]
        n: Option<usize>,
        /// Override the family's unit count.
        #[arg(long)]
        units: Option<usize>,
        /// Override per-method sample counts.
        #[arg(long)]
        mc_samples: Option<usize>,
        /// Override ABM-objective trials per evaluation.
        #[arg(long)]
        eval_trials: Option<usize>,
    },
}

/// Everything the subcommands can fail with, tagged with the exit code the
/// contract assigns it: 2 = invalid input, 3 = infeasible configuration.
struct AppError {
    message: String,
    code: u8,
}

impl AppError {
    fn invalid(message: impl Into<String>) -> Self {
        AppError {
            message: message.into(),
            code: 2,
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        AppError {
            message: message.into(),
            code: 3,
        }
    }
}

impl From<NetworkError> for AppError {
    fn from(e: NetworkError) -> Self {
        match &e {
            NetworkError::InvalidArgument(m)
                if m.contains("exceeds") || m.contains("enemy towns requested") =>
            {
                AppError::infeasible(e.to_string())
            }
            _ => AppError::invalid(e.to_string()),
        }
    }
}

impl From<HarnessError> for AppError {
    fn from(e: HarnessError) -> Self {
        let infeasible = match &e {
            HarnessError::Infeasible(_) => true,
            HarnessError::Centrality(cordon::centrality::CentralityError::Infeasible {
                ..
            }) => true,
            HarnessError::Placement(PlacementError::CapExceeded { .. }) => true,
            HarnessError::Placement(PlacementError::Precondition(m)) => m.contains("exceeds"),
            HarnessError::Network(NetworkError::InvalidArgument(m)) => {
                m.contains("exceeds") || m.contains("enemy towns requested")
            }
            _ => false,
        };
        if infeasible {
            AppError::infeasible(e.to_string())
        } else {
            AppError::invalid(e.to_string())
        }
    }
}

impl From<cordon::sim::SimError> for AppError {
    fn from(e: cordon::sim::SimError) -> Self {
        AppError::invalid(e.to_string())
    }
}

fn parse_mobility(text: &str) -> Result<Mobility, AppError> {
    match text {
        "walk" => Ok(Mobility::Walk),
        "waypoint" => Ok(Mobility::Waypoint),
        other => Err(AppError::invalid(format!(
            "unknown mobility `{other}` (expected walk or waypoint)"
        ))),
    }
}

fn parse_town_list(text: &str) -> Result<BTreeSet<usize>, AppError> {
    let mut ids = BTreeSet::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let id: usize = part
            .parse()
            .map_err(|_| AppError::invalid(format!("`{part}` is not a town id")))?;
        if !ids.insert(id) {
            return Err(AppError::invalid(format!("town {id} listed twice")));
        }
    }
    Ok(ids)
}

fn load_scenario_checked(path: &Path) -> Result<Scenario, AppError> {
    load_scenario(path)
        .map_err(|e| AppError::invalid(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SelectOutput<'a> {
    method: &'a str,
    k: usize,
    remediation: Vec<usize>,
    predicted_value: Option<f64>,
    evaluations_used: usize,
}

#[derive(Serialize)]
struct EvaluateOutput {
    mean: f64,
    std: f64,
    trials: usize,
}

fn write_trace(
    path: &Path,
    scenario: &Scenario,
    zones: &BTreeSet<usize>,
    config: &SimConfig,
    master_seed: u64,
) -> Result<(), AppError> {
    let mut csv = String::from("tick,unit,kind,place,infected\n");
    let mut observer = |tick: usize, units: &[cordon::sim::UnitState]| {
        for unit in units {
            let (kind, place) = match &unit.location {
                Location::Deployed { town, .. } => ("town", town.to_string()),
                Location::OnRoad { from, to, .. } => ("road", format!("{from}-{to}")),
            };
            csv.push_str(&format!(
                "{tick},{},{kind},{place},{}\n",
                unit.id, unit.infected as u8
            ));
        }
    };
    run_trial_observed(scenario, zones, config, mix_seed(master_seed, 0), &mut observer)?;
    std::fs::write(path, csv).map_err(|e| AppError::invalid(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Generate {
            n,
            enemy,
            seed,
            out,
            units,
            budget,
            mobility,
        } => {
            let config = GeneratorConfig {
                num_towns: n,
                num_enemy: enemy,
                budget,
                num_units: units,
                mobility: parse_mobility(&mobility)?,
                seed,
                ..GeneratorConfig::default()
            };
            let scenario = generate(&config)?;
            save_scenario_to(&out, &scenario)
                .map_err(|e| AppError::invalid(format!("{}: {e}", out.display())))?;
            println!(
                "wrote {} towns, {} roads to {}",
                scenario.network.num_towns(),
                scenario.network.num_roads(),
                out.display()
            );
            Ok(())
        }
        Command::Select {
            scenario,
            method,
            k,
            seed,
            mc_samples,
            eval_trials,
            eval_steps,
        } => {
            let method: Method = method.parse().map_err(|e: HarnessError| AppError::invalid(e.to_string()))?;
            let scenario = load_scenario_checked(&scenario)?;
            let options = MethodOptions {
                mc_samples,
                eval_trials,
                eval_steps,
            };
            let selection = run_selection(&scenario, method, k, &options, seed)?;
            let output = SelectOutput {
                method: method.tag(),
                k,
                remediation: selection.zones.iter().copied().collect(),
                predicted_value: selection.predicted_value,
                evaluations_used: selection.evaluations_used,
            };
            println!("{}", serde_json::to_string_pretty(&output).expect("serializable"));
            Ok(())
        }
        Command::Evaluate {
            scenario,
            remediation,
            trials,
            steps,
            seed,
            dump_system,
            trace,
        } => {
            let scenario = load_scenario_checked(&scenario)?;
            let zones = parse_town_list(&remediation)?;
            let mut config = SimConfig::default();
            config.steps = steps;
            if let Some(path) = &dump_system {
                let params = MarkovParams::from_scenario(&scenario);
                let dump =
                    dump_dual_system(&scenario.network, &params, &scenario.enemy_towns, &zones)
                        .map_err(|e| AppError::invalid(e.to_string()))?;
                std::fs::write(path, dump)
                    .map_err(|e| AppError::invalid(format!("{}: {e}", path.display())))?;
            }
            if let Some(path) = &trace {
                write_trace(path, &scenario, &zones, &config, seed)?;
            }
            let summary = evaluate_placement(&scenario, &zones, &config, seed, trials)?;
            let output = EvaluateOutput {
                mean: summary.mean,
                std: summary.std,
                trials: summary.trials,
            };
            println!("{}", serde_json::to_string_pretty(&output).expect("serializable"));
            Ok(())
        }
        Command::Experiment {
            grid,
            out,
            n,
            units,
            mc_samples,
            eval_trials,
        } => {
            let text = std::fs::read_to_string(&grid)
                .map_err(|e| AppError::invalid(format!("{}: {e}", grid.display())))?;
            let grid = load_grid_str(&text)?;
            let mut family = ScenarioFamily::default();
            if let Some(n) = n {
                family.num_towns = n;
            }
            if let Some(units) = units {
                family.num_units = units;
            }
            let mut options = MethodOptions::default();
            options.mc_samples = mc_samples;
            options.eval_steps = grid.steps;
            if let Some(t) = eval_trials {
                options.eval_trials = t;
            }
            let csv = run_table_with(&grid, &family, &options)?;
            std::fs::write(&out, &csv)
                .map_err(|e| AppError::invalid(format!("{}: {e}", out.display())))?;
            println!(
                "wrote {} result rows to {}",
                csv.lines().count().saturating_sub(1),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
