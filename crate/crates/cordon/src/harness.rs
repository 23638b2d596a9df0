//! Experiment harness: one scenario family, every method, every budget cell.
//!
//! A *cell* is a pair (number of enemy strongholds, number of remediation
//! zones). For each cell the harness samples the strongholds, lets each
//! selection method pick its zones, scores every pick with the agent-based
//! simulator, and emits one CSV row per (cell, method) with the mean infected
//! fraction, its standard deviation, and the selection/evaluation runtimes.
//!
//! The design is *paired* so the method columns are comparable: within one
//! family seed, every method sees the identical scenario, the identical
//! stronghold draw, and the identical evaluation seeds — only the chosen
//! zones differ. Stronghold draws are nested (the 3-stronghold set is a
//! prefix of the 5-stronghold set), which keeps the infection-count sweep
//! low-variance too.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::centrality::{self, CentralityError, CentralityMetric, GraphView};
use crate::network::{generate, GeneratorConfig, Mobility, NetworkError, Scenario};
use crate::placement::{
    exhaustive, monte_carlo, random_sampling, uniform_baseline, AbmObjective, DynSysObjective,
    PlacementError, ABM_SAMPLES, DYNSYS_SAMPLES,
};
use crate::sim::{evaluate_placement, mix_seed, EvalSummary, SimConfig, SimError};

/// Final scoring trials per cell (the tables' "averaged over 20 trials").
pub const DEFAULT_TABLE_TRIALS: usize = 20;
/// Simulation steps per scoring trial.
pub const DEFAULT_TABLE_STEPS: usize = 10_000;

// Seed-mixing stream tags, so the derived RNG streams cannot collide.
const STREAM_ENEMY: u64 = 0xE7E31;
const STREAM_CELL: u64 = 0xC3110000;
const STREAM_SELECT: u64 = 0x5E1EC700;
const STREAM_ABM_OBJECTIVE: u64 = 0xAB0B;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment grid: {0}")]
    Grid(String),
    #[error("infeasible cell: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Every selection method the harness can run. The table methods are the
/// first nine; `Exhaustive` is exposed through the CLI for small instances
/// but is not part of the standard table layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    PagerankTopk,
    PagerankIter,
    BetweennessTopk,
    BetweennessIter,
    DynsysBasic,
    DynsysMc,
    AbmBasic,
    AbmMc,
    UniformRandom,
    Exhaustive,
}

impl Method {
    /// The nine methods of the standard comparison table, column order.
    pub const TABLE: [Method; 9] = [
        Method::PagerankTopk,
        Method::PagerankIter,
        Method::BetweennessTopk,
        Method::BetweennessIter,
        Method::DynsysBasic,
        Method::DynsysMc,
        Method::AbmBasic,
        Method::AbmMc,
        Method::UniformRandom,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Method::PagerankTopk => "pagerank-topk",
            Method::PagerankIter => "pagerank-iter",
            Method::BetweennessTopk => "betweenness-topk",
            Method::BetweennessIter => "betweenness-iter",
            Method::DynsysBasic => "dynsys-basic",
            Method::DynsysMc => "dynsys-mc",
            Method::AbmBasic => "abm-basic",
            Method::AbmMc => "abm-mc",
            Method::UniformRandom => "uniform-random",
            Method::Exhaustive => "exhaustive",
        }
    }

    /// Stable index used to derive per-method selection seeds.
    fn stream_index(&self) -> u64 {
        match self {
            Method::PagerankTopk => 0,
            Method::PagerankIter => 1,
            Method::BetweennessTopk => 2,
            Method::BetweennessIter => 3,
            Method::DynsysBasic => 4,
            Method::DynsysMc => 5,
            Method::AbmBasic => 6,
            Method::AbmMc => 7,
            Method::UniformRandom => 8,
            Method::Exhaustive => 9,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pagerank-topk" => Ok(Method::PagerankTopk),
            "pagerank-iter" => Ok(Method::PagerankIter),
            "betweenness-topk" => Ok(Method::BetweennessTopk),
            "betweenness-iter" => Ok(Method::BetweennessIter),
            "dynsys-basic" => Ok(Method::DynsysBasic),
            "dynsys-mc" => Ok(Method::DynsysMc),
            "abm-basic" => Ok(Method::AbmBasic),
            "abm-mc" => Ok(Method::AbmMc),
            "uniform-random" => Ok(Method::UniformRandom),
            "exhaustive" => Ok(Method::Exhaustive),
            other => Err(HarnessError::Grid(format!("unknown method tag `{other}`"))),
        }
    }
}

/// Scenario-family knobs shared by every cell of a table. Defaults are the
/// reference setting: 35 towns on a 50 km square, 5 units at 10 m/s dwelling
/// two hours per deployment.
#[derive(Debug, Clone)]
pub struct ScenarioFamily {
    pub num_towns: usize,
    pub num_units: usize,
    pub unit_speed_mps: f64,
    pub deployment_mean_s: f64,
    pub area_side_m: f64,
}

impl Default for ScenarioFamily {
    fn default() -> Self {
        let g = GeneratorConfig::default();
        ScenarioFamily {
            num_towns: g.num_towns,
            num_units: g.num_units,
            unit_speed_mps: g.unit_speed_mps,
            deployment_mean_s: g.deployment_mean_s,
            area_side_m: g.area_side_m,
        }
    }
}

/// Tuning knobs for the selection methods themselves.
#[derive(Debug, Clone)]
pub struct MethodOptions {
    /// Samples (per round for the greedy search, total for basic sampling).
    /// `None` means the method default: 100 for the equilibrium objective,
    /// 10 for the simulation objective.
    pub mc_samples: Option<usize>,
    /// Simulation trials per objective evaluation inside ABM-driven search.
    pub eval_trials: usize,
    /// Simulation steps per objective evaluation inside ABM-driven search.
    pub eval_steps: usize,
}

impl Default for MethodOptions {
    fn default() -> Self {
        MethodOptions {
            mc_samples: None,
            eval_trials: crate::sim::DEFAULT_EVAL_TRIALS,
            eval_steps: DEFAULT_TABLE_STEPS,
        }
    }
}

/// One comparison table: cells are `infection_counts[i]` strongholds versus
/// `remediation_counts[i]` zones (the two lists are zipped, not crossed, so a
/// table can sweep one axis while holding the other at its maximum), run for
/// every method over every family seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub infection_counts: Vec<usize>,
    pub remediation_counts: Vec<usize>,
    pub methods: Vec<Method>,
    pub mobility: Mobility,
    /// Final scoring trials per cell.
    pub trials: usize,
    /// Simulation steps per scoring trial.
    pub steps: usize,
    /// Scenario family seeds; methods are compared pairwise within each.
    pub seeds: Vec<u64>,
}

impl ExperimentGrid {
    /// The standard seven-row, nine-method comparison layout.
    pub fn standard(mobility: Mobility, seeds: Vec<u64>) -> Self {
        ExperimentGrid {
            infection_counts: vec![5, 5, 5, 5, 3, 1, 0],
            remediation_counts: vec![0, 1, 3, 5, 5, 5, 5],
            methods: Method::TABLE.to_vec(),
            mobility,
            trials: DEFAULT_TABLE_TRIALS,
            steps: DEFAULT_TABLE_STEPS,
            seeds,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.infection_counts.len() != self.remediation_counts.len() {
            return Err(HarnessError::Grid(format!(
                "infection_counts has {} entries but remediation_counts has {}; \
                 the lists are zipped into cells and must match",
                self.infection_counts.len(),
                self.remediation_counts.len()
            )));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Grid("seeds list is empty".into()));
        }
        if self.trials == 0 || self.steps == 0 {
            return Err(HarnessError::Grid(
                "trials and steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Parse a grid description from JSON.
pub fn load_grid_str(text: &str) -> Result<ExperimentGrid, HarnessError> {
    let grid: ExperimentGrid =
        serde_json::from_str(text).map_err(|e| HarnessError::Grid(e.to_string()))?;
    grid.validate()?;
    Ok(grid)
}

/// One CSV row: a cell, a method, and the scored outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub inf_count: usize,
    pub rmd_count: usize,
    pub method: Method,
    pub mean_infected_fraction: f64,
    pub std: f64,
    pub selection_runtime_s: f64,
    pub eval_runtime_s: f64,
}

pub const CSV_HEADER: &str =
    "inf_count,rmd_count,method,mean_infected_fraction,std,selection_runtime_s,eval_runtime_s";

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6}",
            self.inf_count,
            self.rmd_count,
            self.method,
            self.mean_infected_fraction,
            self.std,
            self.selection_runtime_s,
            self.eval_runtime_s
        )
    }
}

/// The stronghold towns for a family seed: the first `count` entries of a
/// seed-determined permutation of all towns. Prefixing makes stronghold sets
/// nested across cells of the same family (3 strongholds ⊂ 5 strongholds).
pub fn enemy_prefix(family_seed: u64, num_towns: usize, count: usize) -> BTreeSet<usize> {
    let mut ids: Vec<usize> = (0..num_towns).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(family_seed, STREAM_ENEMY));
    ids.shuffle(&mut rng);
    ids.into_iter().take(count).collect()
}

/// Build the family's scenario for one cell: generate the map from the
/// family seed, overlay the sampled strongholds, and stamp in the cell's
/// mobility model and budget.
fn cell_scenario(
    family_seed: u64,
    inf_count: usize,
    rmd_count: usize,
    mobility: Mobility,
    family: &ScenarioFamily,
) -> Result<Scenario, HarnessError> {
    if inf_count + rmd_count > family.num_towns {
        return Err(HarnessError::Infeasible(format!(
            "{inf_count} strongholds + {rmd_count} zones exceed {} towns",
            family.num_towns
        )));
    }
    let config = GeneratorConfig {
        num_towns: family.num_towns,
        num_enemy: 0,
        budget: 0,
        num_units: family.num_units,
        area_side_m: family.area_side_m,
        unit_speed_mps: family.unit_speed_mps,
        deployment_mean_s: family.deployment_mean_s,
        mobility,
        seed: family_seed,
        ..GeneratorConfig::default()
    };
    let mut scenario = generate(&config)?;
    scenario.enemy_towns = enemy_prefix(family_seed, family.num_towns, inf_count);
    scenario.budget = rmd_count;
    Ok(scenario)
}

/// What a selection method chose, plus whatever the search itself predicted.
/// Centrality methods never evaluate an objective, so they predict nothing.
#[derive(Debug, Clone)]
pub struct Selection {
    pub zones: BTreeSet<usize>,
    pub predicted_value: Option<f64>,
    pub evaluations_used: usize,
}

/// Run one method's selection phase on a prepared scenario, choosing `k`
/// zones among the non-stronghold towns. `seed` drives both the method's own
/// randomness and (mixed to a separate stream) the simulation draws of the
/// ABM-backed objectives; deterministic methods ignore it.
pub fn run_selection(
    scenario: &Scenario,
    method: Method,
    k: usize,
    options: &MethodOptions,
    seed: u64,
) -> Result<Selection, HarnessError> {
    let enemy = &scenario.enemy_towns;
    let eligible: Vec<usize> = (0..scenario.network.num_towns())
        .filter(|t| !enemy.contains(t))
        .collect();
    let selection_seed = mix_seed(seed, STREAM_SELECT + method.stream_index());
    let from_centrality = |ids: Vec<usize>| Selection {
        zones: ids.into_iter().collect(),
        predicted_value: None,
        evaluations_used: 0,
    };
    let from_search = |r: crate::placement::PlacementResult| Selection {
        zones: r.remediation,
        predicted_value: r.predicted_value,
        evaluations_used: r.evaluations_used,
    };
    let selection = match method {
        Method::PagerankTopk | Method::BetweennessTopk => {
            let metric = if method == Method::PagerankTopk {
                CentralityMetric::pagerank()
            } else {
                CentralityMetric::betweenness()
            };
            let view = GraphView::from_network(&scenario.network);
            let scores = centrality::scores(&view, &metric)?;
            from_centrality(centrality::select_topk(&scores, k, enemy)?)
        }
        Method::PagerankIter | Method::BetweennessIter => {
            let metric = if method == Method::PagerankIter {
                CentralityMetric::pagerank()
            } else {
                CentralityMetric::betweenness()
            };
            from_centrality(centrality::select_iterative(
                &scenario.network,
                &metric,
                k,
                enemy,
            )?)
        }
        Method::DynsysBasic => {
            let mut objective = DynSysObjective::new(scenario);
            let samples = options.mc_samples.unwrap_or(DYNSYS_SAMPLES);
            from_search(random_sampling(
                &mut objective,
                &eligible,
                k,
                samples,
                selection_seed,
            )?)
        }
        Method::DynsysMc => {
            let mut objective = DynSysObjective::new(scenario);
            let samples = options.mc_samples.unwrap_or(DYNSYS_SAMPLES);
            from_search(monte_carlo(
                &mut objective,
                &eligible,
                k,
                samples,
                selection_seed,
            )?)
        }
        Method::AbmBasic | Method::AbmMc => {
            let mut config = SimConfig::default();
            config.eval_trials = options.eval_trials;
            config.steps = options.eval_steps;
            let objective_seed = mix_seed(seed, STREAM_ABM_OBJECTIVE);
            let mut objective = AbmObjective::new(scenario, config, objective_seed);
            let samples = options.mc_samples.unwrap_or(ABM_SAMPLES);
            let result = if method == Method::AbmBasic {
                random_sampling(&mut objective, &eligible, k, samples, selection_seed)?
            } else {
                monte_carlo(&mut objective, &eligible, k, samples, selection_seed)?
            };
            from_search(result)
        }
        Method::UniformRandom => from_search(uniform_baseline(&eligible, k, selection_seed)?),
        Method::Exhaustive => {
            let mut objective = DynSysObjective::new(scenario);
            from_search(exhaustive(&mut objective, &eligible, k)?)
        }
    };
    Ok(selection)
}

/// Detailed outcome of one (family seed, cell, method) run; [`run_cell`]
/// reduces it to a [`ResultRow`], [`run_table`] pools several.
struct CellOutcome {
    summary: EvalSummary,
    selection_s: f64,
    eval_s: f64,
}

fn run_cell_detail(
    family_seed: u64,
    inf_count: usize,
    rmd_count: usize,
    method: Method,
    mobility: Mobility,
    family: &ScenarioFamily,
    options: &MethodOptions,
    trials: usize,
    steps: usize,
) -> Result<CellOutcome, HarnessError> {
    let scenario = cell_scenario(family_seed, inf_count, rmd_count, mobility, family)?;
    // The evaluation master seed is a function of the family seed and the
    // cell only — never the method — so all methods are scored on identical
    // simulation draws.
    let eval_master = mix_seed(
        family_seed,
        STREAM_CELL + (inf_count as u64) * 64 + rmd_count as u64,
    );

    let select_start = Instant::now();
    let zones = run_selection(&scenario, method, rmd_count, options, eval_master)?.zones;
    let selection_s = select_start.elapsed().as_secs_f64();

    let mut config = SimConfig::default();
    config.steps = steps;
    let eval_start = Instant::now();
    let summary = evaluate_placement(&scenario, &zones, &config, eval_master, trials)?;
    let eval_s = eval_start.elapsed().as_secs_f64();

    Ok(CellOutcome {
        summary,
        selection_s,
        eval_s,
    })
}

/// Run one cell for one method on one family seed and score the chosen zones
/// with the simulator (`trials` trials of `steps` steps).
pub fn run_cell(
    family_seed: u64,
    inf_count: usize,
    rmd_count: usize,
    method: Method,
    mobility: Mobility,
    family: &ScenarioFamily,
    options: &MethodOptions,
    trials: usize,
    steps: usize,
) -> Result<ResultRow, HarnessError> {
    let outcome = run_cell_detail(
        family_seed, inf_count, rmd_count, method, mobility, family, options, trials, steps,
    )?;
    Ok(ResultRow {
        inf_count,
        rmd_count,
        method,
        mean_infected_fraction: outcome.summary.mean,
        std: outcome.summary.std,
        selection_runtime_s: outcome.selection_s,
        eval_runtime_s: outcome.eval_s,
    })
}

/// Pool per-seed evaluation summaries into one overall mean and sample
/// standard deviation, as if all trials had been one batch.
fn pool(summaries: &[EvalSummary]) -> (f64, f64) {
    let total: usize = summaries.iter().map(|s| s.trials).sum();
    if total == 0 {
        return (0.0, 0.0);
    }
    let grand_mean =
        summaries.iter().map(|s| s.mean * s.trials as f64).sum::<f64>() / total as f64;
    if total < 2 {
        return (grand_mean, 0.0);
    }
    // Sum of squares about the grand mean, reassembled from each summary's
    // internal scatter plus the offset of its mean.
    let ss: f64 = summaries
        .iter()
        .map(|s| {
            let t = s.trials as f64;
            (t - 1.0) * s.std * s.std + t * (s.mean - grand_mean) * (s.mean - grand_mean)
        })
        .sum();
    (grand_mean, (ss.max(0.0) / (total - 1) as f64).sqrt())
}

/// Run the whole grid and render the CSV table: one row per (cell, method),
/// cells ordered by (infections descending, zones ascending), methods in the
/// grid's order, each row pooled over all family seeds. Runtime columns are
/// the per-seed averages.
pub fn run_table(grid: &ExperimentGrid, family: &ScenarioFamily) -> Result<String, HarnessError> {
    run_table_with(grid, family, &MethodOptions::default())
}

pub fn run_table_with(
    grid: &ExperimentGrid,
    family: &ScenarioFamily,
    options: &MethodOptions,
) -> Result<String, HarnessError> {
    grid.validate()?;
    let mut cells: Vec<(usize, usize)> = grid
        .infection_counts
        .iter()
        .copied()
        .zip(grid.remediation_counts.iter().copied())
        .collect();
    cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (inf, rmd) in cells {
        for &method in &grid.methods {
            let mut summaries = Vec::with_capacity(grid.seeds.len());
            let mut select_s = 0.0;
            let mut eval_s = 0.0;
            for &seed in &grid.seeds {
                let outcome = run_cell_detail(
                    seed,
                    inf,
                    rmd,
                    method,
                    grid.mobility,
                    family,
                    options,
                    grid.trials,
                    grid.steps,
                )?;
                select_s += outcome.selection_s;
                eval_s += outcome.eval_s;
                summaries.push(outcome.summary);
            }
            let (mean, std) = pool(&summaries);
            let row = ResultRow {
                inf_count: inf,
                rmd_count: rmd,
                method,
                mean_infected_fraction: mean,
                std,
                selection_runtime_s: select_s / grid.seeds.len() as f64,
                eval_runtime_s: eval_s / grid.seeds.len() as f64,
            };
            out.push_str(&row.to_csv_line());
            out.push('\n');
        }
    }
    Ok(out)
}
