//! Search strategies over remediation-zone sets.
//!
//! Every search minimizes a pluggable objective `f : 2^eligible -> [0,1]`,
//! the predicted infected fraction if zones were placed at that subset.
//! Two objectives are provided: the steady-state model ([`DynSysObjective`],
//! fast, deterministic) and the agent-based simulation ([`AbmObjective`],
//! slower, averaged over trials with common random numbers so candidates are
//! compared on identical trial seeds).
//!
//! Strategies:
//! - [`exhaustive`] — every k-subset, capped, lexicographically-smallest ties;
//! - [`random_sampling`] — s independent uniform k-subsets, keep the best;
//! - [`monte_carlo`] — greedy marginal-average committal: each round draws s
//!   random completions of the committed prefix, averages each fresh town's
//!   objective mass, and commits the most promising member of the best
//!   superset seen so far;
//! - [`uniform_baseline`] — one uniform draw, no evaluation (control arm).
//!
//! The greedy committal step needs two repairs around the edges: the running
//! best `f*` starts at infinity (a zero start could never be beaten by values
//! in [0,1]), and when the best set's uncommitted members were not sampled in
//! the current round (their per-round averages are undefined) the commit falls
//! back to the best average over everything sampled this round.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::equilibrium::{dual_equilibrium_linearized, MarkovParams};
use crate::network::Scenario;
use crate::sim::{evaluate_placement, SimConfig};

/// Largest number of subsets [`exhaustive`] will enumerate by default.
pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 100_000;
/// Samples per round for searches driven by the steady-state objective.
pub const DYNSYS_SAMPLES: usize = 100;
/// Samples per round for searches driven by the simulation objective.
pub const ABM_SAMPLES: usize = 10;

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error("placement precondition violated: {0}")]
    Precondition(String),
    #[error("{combinations} candidate subsets exceed the exhaustive cap {cap}")]
    CapExceeded { combinations: u128, cap: u128 },
    #[error("objective evaluation failed: {0}")]
    Evaluation(String),
}

/// A placement objective: lower is better.
///
/// Implementations must be deterministic — the same candidate must score the
/// same value within one search, or best-tracking becomes meaningless.
pub trait ObjectiveFn {
    fn value(&mut self, candidate: &BTreeSet<usize>) -> Result<f64, PlacementError>;
}

/// Predicted infected fraction from the linearized steady-state model.
pub struct DynSysObjective<'a> {
    scenario: &'a Scenario,
    params: MarkovParams,
}

impl<'a> DynSysObjective<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        DynSysObjective {
            scenario,
            params: MarkovParams::from_scenario(scenario),
        }
    }
}

impl ObjectiveFn for DynSysObjective<'_> {
    fn value(&mut self, candidate: &BTreeSet<usize>) -> Result<f64, PlacementError> {
        dual_equilibrium_linearized(
            &self.scenario.network,
            &self.params,
            &self.scenario.enemy_towns,
            candidate,
        )
        .map(|d| d.infected_fraction())
        .map_err(|e| PlacementError::Evaluation(e.to_string()))
    }
}

/// Mean infected fraction over simulation trials. All candidates are scored
/// on the same trial seeds (common random numbers).
pub struct AbmObjective<'a> {
    scenario: &'a Scenario,
    config: SimConfig,
    master_seed: u64,
}

impl<'a> AbmObjective<'a> {
    pub fn new(scenario: &'a Scenario, config: SimConfig, master_seed: u64) -> Self {
        AbmObjective {
            scenario,
            config,
            master_seed,
        }
    }
}

impl ObjectiveFn for AbmObjective<'_> {
    fn value(&mut self, candidate: &BTreeSet<usize>) -> Result<f64, PlacementError> {
        evaluate_placement(
            self.scenario,
            candidate,
            &self.config,
            self.master_seed,
            self.config.eval_trials,
        )
        .map(|s| s.mean)
        .map_err(|e| PlacementError::Evaluation(e.to_string()))
    }
}

/// A chosen remediation set plus how it was found.
#[derive(Debug, Clone)]
pub struct PlacementResult {
    pub remediation: BTreeSet<usize>,
    /// The objective value the search attributes to the set. `None` for the
    /// uniform baseline, which never evaluates anything.
    pub predicted_value: Option<f64>,
    pub method: String,
    pub evaluations_used: usize,
    pub elapsed_s: f64,
}

/// Internal best-tracking state of [`monte_carlo`], exposed for audits.
#[derive(Debug, Clone)]
pub struct McAudit {
    pub best_set: BTreeSet<usize>,
    pub best_value: f64,
}

fn check_eligible(eligible: &[usize], k: usize) -> Result<(), PlacementError> {
    if !eligible.windows(2).all(|w| w[0] < w[1]) {
        return Err(PlacementError::Precondition(
            "eligible towns must be sorted and distinct".into(),
        ));
    }
    if k > eligible.len() {
        return Err(PlacementError::Precondition(format!(
            "budget {} exceeds the {} eligible towns",
            k,
            eligible.len()
        )));
    }
    Ok(())
}

fn count_combinations(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// One uniform k-subset of `pool` via a Fisher–Yates prefix.
fn draw_subset(pool: &[usize], k: usize, rng: &mut ChaCha8Rng) -> BTreeSet<usize> {
    let mut scratch: Vec<usize> = pool.to_vec();
    for i in 0..k {
        let j = rng.gen_range(i..scratch.len());
        scratch.swap(i, j);
    }
    scratch[..k].iter().copied().collect()
}

/// Evaluates every k-subset of `eligible` and returns the minimizer, breaking
/// ties toward the lexicographically smallest id tuple. Errors out before
/// evaluating anything if the subset count exceeds the default cap.
pub fn exhaustive<F: ObjectiveFn>(
    objective: &mut F,
    eligible: &[usize],
    k: usize,
) -> Result<PlacementResult, PlacementError> {
    exhaustive_capped(objective, eligible, k, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn exhaustive_capped<F: ObjectiveFn>(
    objective: &mut F,
    eligible: &[usize],
    k: usize,
    cap: u128,
) -> Result<PlacementResult, PlacementError> {
    check_eligible(eligible, k)?;
    let combinations = count_combinations(eligible.len(), k);
    if combinations > cap {
        return Err(PlacementError::CapExceeded { combinations, cap });
    }
    let start = Instant::now();
    let mut best: Option<(BTreeSet<usize>, f64)> = None;
    let mut evals = 0usize;
    // Combinations of a sorted slice arrive in lexicographic order, so a
    // strictly-better comparison keeps the lexicographically smallest tie.
    for combo in eligible.iter().copied().combinations(k) {
        let candidate: BTreeSet<usize> = combo.into_iter().collect();
        let value = objective.value(&candidate)?;
        evals += 1;
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((candidate, value));
        }
    }
    let (remediation, value) = best.expect("at least one combination exists");
    Ok(PlacementResult {
        remediation,
        predicted_value: Some(value),
        method: "exhaustive".into(),
        evaluations_used: evals,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// Draws `samples` uniform k-subsets (with replacement across draws) and
/// returns the best one seen.
pub fn random_sampling<F: ObjectiveFn>(
    objective: &mut F,
    eligible: &[usize],
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<PlacementResult, PlacementError> {
    check_eligible(eligible, k)?;
    if samples == 0 {
        return Err(PlacementError::Precondition("need at least one sample".into()));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(BTreeSet<usize>, f64)> = None;
    for _ in 0..samples {
        let candidate = draw_subset(eligible, k, &mut rng);
        let value = objective.value(&candidate)?;
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((candidate, value));
        }
    }
    let (remediation, value) = best.expect("samples >= 1");
    Ok(PlacementResult {
        remediation,
        predicted_value: Some(value),
        method: "random-sampling".into(),
        evaluations_used: samples,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// Greedy marginal-average search: commits one town per round, guided by `s`
/// random completions per round. Returns the committed set, scored once at
/// the end.
pub fn monte_carlo<F: ObjectiveFn>(
    objective: &mut F,
    eligible: &[usize],
    k: usize,
    samples_per_round: usize,
    seed: u64,
) -> Result<PlacementResult, PlacementError> {
    monte_carlo_audited(objective, eligible, k, samples_per_round, seed).map(|(r, _)| r)
}

/// Like [`monte_carlo`], also returning the tracked global best for audits.
pub fn monte_carlo_audited<F: ObjectiveFn>(
    objective: &mut F,
    eligible: &[usize],
    k: usize,
    samples_per_round: usize,
    seed: u64,
) -> Result<(PlacementResult, McAudit), PlacementError> {
    check_eligible(eligible, k)?;
    if samples_per_round == 0 {
        return Err(PlacementError::Precondition(
            "need at least one sample per round".into(),
        ));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut committed: BTreeSet<usize> = BTreeSet::new();
    let mut best_set: BTreeSet<usize> = BTreeSet::new();
    let mut best_value = f64::INFINITY;
    let mut evals = 0usize;

    for round in 1..=k {
        let fresh_size = k - (round - 1);
        let pool: Vec<usize> = eligible
            .iter()
            .copied()
            .filter(|v| !committed.contains(v))
            .collect();
        // Per-round marginal mass of each fresh town sampled this round.
        let mut sum: BTreeMap<usize, f64> = BTreeMap::new();
        let mut count: BTreeMap<usize, usize> = BTreeMap::new();
        for _ in 0..samples_per_round {
            let fresh = draw_subset(&pool, fresh_size, &mut rng);
            let mut candidate = committed.clone();
            candidate.extend(fresh.iter().copied());
            let value = objective.value(&candidate)?;
            evals += 1;
            for &v in &fresh {
                *sum.entry(v).or_insert(0.0) += value;
                *count.entry(v).or_insert(0) += 1;
            }
            if value < best_value {
                best_value = value;
                best_set = candidate;
            }
        }
        // Commit the most promising member of the best set seen so far.
        // Members must have been sampled this round for their average to be
        // defined; failing that, fall back to everything sampled this round.
        let average = |v: usize| sum[&v] / count[&v] as f64;
        let primary: Vec<usize> = best_set
            .iter()
            .copied()
            .filter(|v| !committed.contains(v) && count.contains_key(v))
            .collect();
        let candidates: Vec<usize> = if primary.is_empty() {
            count.keys().copied().collect()
        } else {
            primary
        };
        let chosen = candidates
            .iter()
            .copied()
            .fold(None::<(usize, f64)>, |acc, v| {
                let a = average(v);
                // Strict comparison on sorted candidates keeps the lowest id.
                match acc {
                    Some((_, best_a)) if best_a <= a => acc,
                    _ => Some((v, a)),
                }
            })
            .expect("each round samples at least one town")
            .0;
        committed.insert(chosen);
    }

    let value = objective.value(&committed)?;
    evals += 1;
    if value < best_value {
        best_value = value;
        best_set = committed.clone();
    }
    Ok((
        PlacementResult {
            remediation: committed,
            predicted_value: Some(value),
            method: "monte-carlo".into(),
            evaluations_used: evals,
            elapsed_s: start.elapsed().as_secs_f64(),
        },
        McAudit {
            best_set,
            best_value,
        },
    ))
}

/// A uniformly random feasible set; the control arm. Never evaluates the
/// objective — its score comes from the final simulation pass alone.
pub fn uniform_baseline(
    eligible: &[usize],
    k: usize,
    seed: u64,
) -> Result<PlacementResult, PlacementError> {
    check_eligible(eligible, k)?;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let remediation = draw_subset(eligible, k, &mut rng);
    Ok(PlacementResult {
        remediation,
        predicted_value: None,
        method: "uniform-random".into(),
        evaluations_used: 0,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
