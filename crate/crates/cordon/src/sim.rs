//! Agent-based simulation of mobile units on a road network.
//!
//! Each unit alternates between being deployed at a town and travelling along
//! a road. Time advances in fixed ticks. Within a tick the phases run in unit
//! id order:
//!
//! 1. movement — advance road progress by `tick * speed`, or count down the
//!    deployment timer. A unit that reaches the end of a road either deploys
//!    at the destination (itinerary exhausted) or rolls straight onto the next
//!    road, possibly passing through several towns in one tick.
//! 2. town effects — every town touched this tick (arrival or pass-through)
//!    acts on the unit in traversal order: a remediation zone cleans it, an
//!    enemy stronghold infects it.
//! 3. contacts — units inside the same town's radius, and units passing each
//!    other on a road (opposite directions within the contact radius, or whose
//!    positions crossed during the tick), exchange infection transitively
//!    until the tick's contact graph reaches a fixed point.
//! 4. departures — units whose deployment timer has run out pick a next
//!    destination under the mobility model and step onto the first road of
//!    their itinerary (with zero progress; they start moving next tick).
//!
//! Remediation happens only on entry/pass-through, so a unit sitting in a
//! remediation zone can still be re-infected by a contact later in the same
//! tick; that conservative choice is deliberate and shared with the
//! steady-state models' worst-case spirit.
//!
//! Contact detection uses straight-line interpolated positions between town
//! centers. Opposite-direction crossings are detected by comparing signed
//! gaps across consecutive ticks; a pair where one unit entered the road this
//! very tick can only be caught by the proximity rule, a deliberate sliver of
//! undercounting at coarse ticks.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::{Mobility, Scenario};

/// Default tick length, seconds.
pub const DEFAULT_TICK_S: f64 = 60.0;
/// Default number of ticks per trial.
pub const DEFAULT_STEPS: usize = 10_000;
/// Default contact radius, meters.
pub const DEFAULT_CONTACT_RADIUS_M: f64 = 100.0;
/// Trials per placement evaluation while searching.
pub const DEFAULT_EVAL_TRIALS: usize = 10;
/// Trials per placement when scoring a final answer.
pub const DEFAULT_FINAL_TRIALS: usize = 20;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation precondition violated: {0}")]
    Precondition(String),
}

/// How deployment dwell times are drawn.
///
/// The headline model uses a fixed dwell equal to the town's mean. The
/// exponential mode exists so the simulator's long-run occupancy can be
/// cross-checked against the continuous-time equilibrium model, which assumes
/// exponential waits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeploymentModel {
    Fixed,
    Exponential,
}

/// Simulation knobs. `Default` gives the headline configuration.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub tick_s: f64,
    pub steps: usize,
    pub contact_radius_m: f64,
    /// Trials averaged per candidate while a search is running.
    pub eval_trials: usize,
    /// Trials averaged when reporting a final score.
    pub final_trials: usize,
    pub deployment: DeploymentModel,
    /// Units forced to start infected (test hook; enemy-town starters are
    /// infected regardless).
    pub initial_infected: BTreeSet<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tick_s: DEFAULT_TICK_S,
            steps: DEFAULT_STEPS,
            contact_radius_m: DEFAULT_CONTACT_RADIUS_M,
            eval_trials: DEFAULT_EVAL_TRIALS,
            final_trials: DEFAULT_FINAL_TRIALS,
            deployment: DeploymentModel::Fixed,
            initial_infected: BTreeSet::new(),
        }
    }
}

/// Where a unit is.
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    /// Sitting at a town center with `remaining_s` of deployment left.
    Deployed { town: usize, remaining_s: f64 },
    /// Travelling `from -> to`, `progress_m` meters along the road.
    /// `itinerary` holds the towns still to visit; its first element is `to`.
    OnRoad {
        from: usize,
        to: usize,
        progress_m: f64,
        itinerary: Vec<usize>,
    },
}

/// One mobile unit.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitState {
    pub id: usize,
    pub location: Location,
    pub infected: bool,
}

/// Result of a single simulated trial.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub infected_count: usize,
    pub num_units: usize,
    pub final_states: Vec<UnitState>,
}

impl TrialOutcome {
    pub fn infected_fraction(&self) -> f64 {
        self.infected_count as f64 / self.num_units as f64
    }
}

/// Mean and sample standard deviation of the infected fraction over trials.
#[derive(Debug, Clone, Copy)]
pub struct EvalSummary {
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

/// Derives an independent sub-seed from a master seed and a stream index
/// (trial number, grid cell, ...). SplitMix64-style avalanche so that
/// consecutive indices give unrelated streams.
pub fn mix_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_preconditions(scenario: &Scenario, remediation: &BTreeSet<usize>) -> Result<(), SimError> {
    let n = scenario.network.num_towns();
    for &t in scenario.enemy_towns.iter().chain(remediation.iter()) {
        if t >= n {
            return Err(SimError::Precondition(format!(
                "town id {t} out of range (have {n} towns)"
            )));
        }
    }
    if let Some(&t) = scenario.enemy_towns.intersection(remediation).next() {
        return Err(SimError::Precondition(format!(
            "town {t} is both an enemy stronghold and a remediation zone"
        )));
    }
    if !scenario.network.is_connected() {
        return Err(SimError::Precondition("network is not connected".into()));
    }
    if scenario.num_units == 0 {
        return Err(SimError::Precondition("need at least one unit".into()));
    }
    if !(scenario.unit_speed_mps > 0.0) {
        return Err(SimError::Precondition("unit speed must be positive".into()));
    }
    for t in 0..n {
        if !(scenario.deployment_mean_at(t) > 0.0) {
            return Err(SimError::Precondition(format!(
                "deployment mean at town {t} must be positive"
            )));
        }
    }
    Ok(())
}

fn draw_dwell(scenario: &Scenario, config: &SimConfig, town: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mean = scenario.deployment_mean_at(town);
    match config.deployment {
        DeploymentModel::Fixed => mean,
        DeploymentModel::Exponential => {
            // Inverse-CDF sample; 1 - u keeps the argument strictly positive.
            let u: f64 = rng.gen::<f64>();
            -mean * (1.0 - u).ln()
        }
    }
}

/// Picks the towns a departing unit will visit, in order. The first element
/// is the immediate road destination; the last is where it will deploy next.
fn draw_itinerary(scenario: &Scenario, current: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match scenario.mobility {
        Mobility::Walk => {
            let nbrs = scenario.network.neighbors(current);
            let pick = rng.gen_range(0..nbrs.len());
            vec![nbrs[pick].0]
        }
        Mobility::Waypoint => {
            let n = scenario.network.num_towns();
            // Uniform over towns other than the current one.
            let mut target = rng.gen_range(0..n - 1);
            if target >= current {
                target += 1;
            }
            let (path, _) = scenario
                .network
                .shortest_path(current, target)
                .expect("connected network has a path between any two towns");
            path[1..].to_vec()
        }
    }
}

fn road_length(scenario: &Scenario, from: usize, to: usize) -> f64 {
    let idx = scenario
        .network
        .road_between(from, to)
        .expect("itinerary steps follow existing roads");
    scenario.network.road(idx).length
}

/// Interpolated map position of a unit.
fn position(scenario: &Scenario, unit: &UnitState) -> (f64, f64) {
    match &unit.location {
        Location::Deployed { town, .. } => {
            let t = scenario.network.town(*town);
            (t.x, t.y)
        }
        Location::OnRoad {
            from,
            to,
            progress_m,
            ..
        } => {
            let a = scenario.network.town(*from);
            let b = scenario.network.town(*to);
            let len = road_length(scenario, *from, *to);
            let frac = (progress_m / len).clamp(0.0, 1.0);
            (a.x + (b.x - a.x) * frac, a.y + (b.y - a.y) * frac)
        }
    }
}

/// Signed coordinate along an undirected road, measured from the lower-id
/// endpoint, plus the direction sign. Used for crossing detection.
fn road_offset(unit: &UnitState, scenario: &Scenario) -> Option<((usize, usize), f64, bool)> {
    if let Location::OnRoad {
        from,
        to,
        progress_m,
        ..
    } = &unit.location
    {
        let key = (*from.min(to), *from.max(to));
        let len = road_length(scenario, *from, *to);
        let offset = if from < to { *progress_m } else { len - *progress_m };
        Some((key, offset, from < to))
    } else {
        None
    }
}

/// Applies entry effects for one touched town, in the fixed order
/// remediation first, enemy infection second.
fn apply_town_effects(
    town: usize,
    infected: &mut bool,
    enemy: &BTreeSet<usize>,
    remediation: &BTreeSet<usize>,
) {
    if remediation.contains(&town) {
        *infected = false;
    }
    if enemy.contains(&town) {
        *infected = true;
    }
}

/// Runs one trial and reports the final infected count.
pub fn run_trial(
    scenario: &Scenario,
    remediation: &BTreeSet<usize>,
    config: &SimConfig,
    trial_seed: u64,
) -> Result<TrialOutcome, SimError> {
    run_trial_observed(scenario, remediation, config, trial_seed, &mut |_, _| {})
}

/// Like [`run_trial`], but calls `observer(tick, units)` with the initial
/// state (tick 0) and after every completed tick (1..=steps).
pub fn run_trial_observed(
    scenario: &Scenario,
    remediation: &BTreeSet<usize>,
    config: &SimConfig,
    trial_seed: u64,
    observer: &mut dyn FnMut(usize, &[UnitState]),
) -> Result<TrialOutcome, SimError> {
    check_preconditions(scenario, remediation)?;
    let n = scenario.network.num_towns();
    let num_units = scenario.num_units;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);

    // Initial placement: uniform over all towns, enemy strongholds included.
    // A unit starting in a stronghold is infected from the outset; the
    // explicit seeding hook can infect any other unit too.
    let mut units: Vec<UnitState> = (0..num_units)
        .map(|id| {
            let town = rng.gen_range(0..n);
            let remaining_s = draw_dwell(scenario, config, town, &mut rng);
            let infected =
                scenario.enemy_towns.contains(&town) || config.initial_infected.contains(&id);
            UnitState {
                id,
                location: Location::Deployed { town, remaining_s },
                infected,
            }
        })
        .collect();

    observer(0, &units);

    let move_per_tick = scenario.unit_speed_mps * config.tick_s;
    // Per-unit towns touched this tick, rebuilt each iteration.
    let mut touched: Vec<Vec<usize>> = vec![Vec::new(); num_units];
    let mut expired: Vec<bool> = vec![false; num_units];

    for step in 0..config.steps {
        // Snapshot road coordinates before movement for crossing detection.
        let prev_offsets: Vec<_> = units.iter().map(|u| road_offset(u, scenario)).collect();

        // Phase 1+2: movement and town effects, unit by unit.
        for u in units.iter_mut() {
            touched[u.id].clear();
            expired[u.id] = false;
            match &mut u.location {
                Location::Deployed { remaining_s, .. } => {
                    *remaining_s -= config.tick_s;
                    if *remaining_s <= 0.0 {
                        expired[u.id] = true;
                    }
                }
                Location::OnRoad {
                    from,
                    to,
                    progress_m,
                    itinerary,
                } => {
                    *progress_m += move_per_tick;
                    loop {
                        let len = road_length(scenario, *from, *to);
                        if *progress_m < len - 1e-9 {
                            break;
                        }
                        // Arrived at `to`.
                        let here = *to;
                        touched[u.id].push(here);
                        apply_town_effects(
                            here,
                            &mut u.infected,
                            &scenario.enemy_towns,
                            remediation,
                        );
                        debug_assert_eq!(itinerary.first(), Some(&here));
                        itinerary.remove(0);
                        if let Some(&next) = itinerary.first() {
                            let leftover = *progress_m - len;
                            *from = here;
                            *to = next;
                            *progress_m = leftover;
                        } else {
                            let remaining_s = draw_dwell(scenario, config, here, &mut rng);
                            u.location = Location::Deployed {
                                town: here,
                                remaining_s,
                            };
                            break;
                        }
                    }
                }
            }
        }

        // Phase 3: contacts. First gather who counts as "at" each town:
        // anyone whose position lies inside the radius, plus anyone who
        // passed through this tick.
        let positions: Vec<(f64, f64)> = units.iter().map(|u| position(scenario, u)).collect();
        let mut contact_edges: Vec<(usize, usize)> = Vec::new();
        for town in scenario.network.towns() {
            let mut present: Vec<usize> = Vec::new();
            for u in &units {
                let (x, y) = positions[u.id];
                let inside =
                    (x - town.x).powi(2) + (y - town.y).powi(2) <= town.radius * town.radius;
                if inside || touched[u.id].contains(&town.id) {
                    present.push(u.id);
                }
            }
            for i in 0..present.len() {
                for j in i + 1..present.len() {
                    contact_edges.push((present[i], present[j]));
                }
            }
        }
        // Road contacts: opposite directions on the same road, either within
        // the contact radius now or having crossed since the last tick.
        let now_offsets: Vec<_> = units.iter().map(|u| road_offset(u, scenario)).collect();
        for i in 0..num_units {
            let Some((key_i, off_i, dir_i)) = now_offsets[i] else {
                continue;
            };
            for j in i + 1..num_units {
                let Some((key_j, off_j, dir_j)) = now_offsets[j] else {
                    continue;
                };
                if key_i != key_j || dir_i == dir_j {
                    continue;
                }
                let near = (off_i - off_j).abs() <= config.contact_radius_m;
                let crossed = match (prev_offsets[i], prev_offsets[j]) {
                    (Some((pk_i, p_i, pd_i)), Some((pk_j, p_j, pd_j)))
                        if pk_i == key_i && pk_j == key_j && pd_i == dir_i && pd_j == dir_j =>
                    {
                        (p_i - p_j) * (off_i - off_j) < 0.0
                    }
                    _ => false,
                };
                if near || crossed {
                    contact_edges.push((i, j));
                }
            }
        }
        // Propagate infection across the tick's contact graph to a fixed
        // point (transitive within the tick).
        loop {
            let mut changed = false;
            for &(a, b) in &contact_edges {
                if units[a].infected != units[b].infected {
                    units[a].infected = true;
                    units[b].infected = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // Phase 4: departures, unit by unit.
        for id in 0..num_units {
            if !expired[id] {
                continue;
            }
            let Location::Deployed { town, .. } = units[id].location else {
                continue;
            };
            let itinerary = draw_itinerary(scenario, town, &mut rng);
            units[id].location = Location::OnRoad {
                from: town,
                to: itinerary[0],
                progress_m: 0.0,
                itinerary,
            };
        }

        observer(step + 1, &units);
    }

    let infected_count = units.iter().filter(|u| u.infected).count();
    Ok(TrialOutcome {
        infected_count,
        num_units,
        final_states: units,
    })
}

/// Runs `trials` independent trials (sub-seeded from `master_seed`) and
/// summarizes the infected fraction.
pub fn evaluate_placement(
    scenario: &Scenario,
    remediation: &BTreeSet<usize>,
    config: &SimConfig,
    master_seed: u64,
    trials: usize,
) -> Result<EvalSummary, SimError> {
    if trials == 0 {
        return Err(SimError::Precondition("need at least one trial".into()));
    }
    let mut fractions = Vec::with_capacity(trials);
    for t in 0..trials {
        let outcome = run_trial(scenario, remediation, config, mix_seed(master_seed, t as u64))?;
        fractions.push(outcome.infected_fraction());
    }
    let mean = fractions.iter().sum::<f64>() / trials as f64;
    let std = if trials > 1 {
        let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    Ok(EvalSummary { mean, std, trials })
}
