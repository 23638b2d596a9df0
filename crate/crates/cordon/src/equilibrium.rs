//! Mean-field Markov models of unit movement and infection.
//!
//! Movement is modelled as a continuous-time Markov chain over one state per
//! town plus one per direction of each road: a unit deployed at town `i`
//! leaves at rate `1/w_i`, picking each incident road uniformly, and a unit
//! on road `(i,j)` arrives at `j` at rate `1/w_{i,j}`. The stationary
//! distribution of that chain ([`baseline_equilibrium`]) says where a unit
//! spends its time in the long run.
//!
//! Infection doubles every state into clean/infected copies coupled by three
//! mechanisms: enemy towns force units infected, remediation zones force them
//! clean, and a clean unit sharing a town (or passing on a road) with any of
//! the other `N-1` units risks catching malware from each independently. At
//! equilibrium the pairwise-encounter terms make the balance equations
//! nonlinear; [`dual_equilibrium_linearized`] substitutes the baseline
//! occupancy for the infected occupancy inside every such term, which yields
//! a linear system and deliberately *over-estimates* infection (the baseline
//! bounds the infected share from above). [`nonlinear_fixed_point`] instead
//! solves the untouched equations by damped fixed-point iteration and serves
//! as the reference the linearization is checked against.
//!
//! One wart is inherited knowingly: the infected-gain cross terms (a clean
//! unit converted in place by an infected arrival) have no matching loss
//! terms in the clean equations, so the dual balance equations do not
//! conserve total probability — summed up they leave a defect proportional to
//! `(N-1)` times the clean-mass/arrival-pressure products. The balance rows
//! are therefore *jointly inconsistent* with normalization: they form a
//! full-rank homogeneous system whose only exact solution is zero. Dropping
//! one row (the baseline recipe) concentrates the whole defect on that row's
//! variable and drives it far negative on realistic instances. Instead the
//! dual systems are solved as a constrained least-squares problem: minimize
//! the balance residual subject to total mass 1 and nonnegativity, with the
//! structural zeros (clean at enemy towns, infected at remediation towns)
//! eliminated exactly and remaining negatives removed by sequentially pinning
//! them to zero and re-solving. Whenever the equations happen to be
//! consistent (`N = 1`, or no enemy towns) this reduces to the exact
//! solution.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::network::{RoadNetwork, Scenario};

const PICARD_DAMPING: f64 = 0.5;
const PICARD_TOLERANCE: f64 = 1e-8;
const PICARD_MAX_ITERS: usize = 10_000;
/// Numerical dust tolerated below zero before a baseline solution is
/// rejected. The baseline system is consistent, so anything beyond rounding
/// noise signals a real defect.
const NEGATIVE_DUST: f64 = -1e-9;
/// Components of a dual least-squares solution below this threshold are
/// treated as genuinely negative and pinned to zero for a re-solve; anything
/// in (threshold, 0) is numerical dust.
const NNLS_PIN_THRESHOLD: f64 = -1e-9;
/// Cap on pin-and-re-solve rounds; each round pins at least one variable, so
/// this is only a guard against pathological churn.
const NNLS_MAX_ROUNDS: usize = 64;

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("equilibrium system is singular: {0}")]
    Singular(String),
    #[error("solution residual {residual:.3e} exceeds {threshold:.3e}")]
    ResidualCheck { residual: f64, threshold: f64 },
    #[error("solution has negative component {value:.3e}")]
    NegativeProbability { value: f64 },
    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },
}

/// Waiting-time parameters: mean dwell per town, mean traversal per directed
/// road, and the number of units `N` (which controls encounter pressure).
#[derive(Debug, Clone)]
pub struct MarkovParams {
    pub town_wait_s: Vec<f64>,
    pub road_wait_s: BTreeMap<(usize, usize), f64>,
    pub num_units: usize,
}

impl MarkovParams {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let net = &scenario.network;
        let town_wait_s = (0..net.num_towns())
            .map(|i| scenario.deployment_mean_at(i))
            .collect();
        let mut road_wait_s = BTreeMap::new();
        for r in net.roads() {
            road_wait_s.insert((r.a, r.b), r.travel_time);
            road_wait_s.insert((r.b, r.a), r.travel_time);
        }
        MarkovParams {
            town_wait_s,
            road_wait_s,
            num_units: scenario.num_units,
        }
    }
}

/// Stationary occupancy of the movement chain, ignoring infection.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDistribution {
    pub town: Vec<f64>,
    pub road: BTreeMap<(usize, usize), f64>,
}

impl BaselineDistribution {
    pub fn total(&self) -> f64 {
        self.town.iter().sum::<f64>() + self.road.values().sum::<f64>()
    }
}

/// Stationary occupancy split into clean and infected copies of every state.
#[derive(Debug, Clone, PartialEq)]
pub struct DualDistribution {
    pub town_clean: Vec<f64>,
    pub town_infected: Vec<f64>,
    pub road_clean: BTreeMap<(usize, usize), f64>,
    pub road_infected: BTreeMap<(usize, usize), f64>,
}

impl DualDistribution {
    /// Long-run fraction of units carrying malware: the objective every
    /// placement search minimizes.
    pub fn infected_fraction(&self) -> f64 {
        let total = self.town_infected.iter().sum::<f64>()
            + self.road_infected.values().sum::<f64>();
        total.clamp(0.0, 1.0)
    }

    pub fn total(&self) -> f64 {
        self.town_clean.iter().sum::<f64>()
            + self.town_infected.iter().sum::<f64>()
            + self.road_clean.values().sum::<f64>()
            + self.road_infected.values().sum::<f64>()
    }
}

// ---------------------------------------------------------------------------
// Shared assembly machinery

struct Indexer {
    n: usize,
    edges: Vec<(usize, usize)>,
    eidx: BTreeMap<(usize, usize), usize>,
}

impl Indexer {
    fn new(net: &RoadNetwork) -> Self {
        let edges = net.directed_edges();
        let eidx = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        Indexer {
            n: net.num_towns(),
            edges,
            eidx,
        }
    }

    fn m(&self) -> usize {
        self.edges.len()
    }
}

fn check_preconditions(net: &RoadNetwork, params: &MarkovParams) -> Result<(), EquilibriumError> {
    if net.num_towns() == 0 {
        return Err(EquilibriumError::Precondition("empty network".into()));
    }
    if !net.is_connected() {
        return Err(EquilibriumError::Precondition("graph not connected".into()));
    }
    for i in 0..net.num_towns() {
        if net.degree(i) == 0 {
            return Err(EquilibriumError::Precondition(format!(
                "degree 0 at town {i}"
            )));
        }
    }
    if params.town_wait_s.len() != net.num_towns() {
        return Err(EquilibriumError::Precondition(
            "town wait vector length mismatch".into(),
        ));
    }
    for (i, &w) in params.town_wait_s.iter().enumerate() {
        if !(w > 0.0) || !w.is_finite() {
            return Err(EquilibriumError::Precondition(format!(
                "non-positive wait at town {i}"
            )));
        }
    }
    for r in net.roads() {
        for key in [(r.a, r.b), (r.b, r.a)] {
            match params.road_wait_s.get(&key) {
                Some(&w) if w > 0.0 && w.is_finite() => {}
                _ => {
                    return Err(EquilibriumError::Precondition(format!(
                        "missing or non-positive wait on road {}-{}",
                        key.0, key.1
                    )))
                }
            }
        }
    }
    if params.num_units < 1 {
        return Err(EquilibriumError::Precondition(
            "num_units must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Gaussian elimination with partial pivoting on a dense square system.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, EquilibriumError> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pivot_abs < 1e-12 * scale {
            return Err(EquilibriumError::Singular(format!(
                "pivot {pivot_abs:.3e} in column {col}"
            )));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

fn max_residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let lhs: f64 = row.iter().zip(x).map(|(c, v)| c * v).sum();
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Solve an inconsistent homogeneous balance system in the least-squares
/// sense subject to the mass constraint `sum(x) = 1` and `x >= 0`, with
/// `pinned` variables eliminated (held at exactly zero).
///
/// The equality-constrained problem is solved directly (see
/// [`bordered_least_squares`]); nonnegativity is then enforced by sequential
/// pinning: any component that comes back materially negative is added to the
/// pin set and the reduced problem is re-solved. Pins are never released, so
/// the loop terminates in at most `nvars` rounds (two to four in practice).
/// The result is a deterministic projection of the balance equations onto the
/// probability simplex — not always the exact constrained optimum, but it
/// coincides with the plain solution whenever that solution is already
/// feasible (in particular whenever the system is consistent).
fn solve_least_squares_normalized(
    rows: &[Vec<f64>],
    pinned: &BTreeSet<usize>,
) -> Result<Vec<f64>, EquilibriumError> {
    let mut pins = pinned.clone();
    for _ in 0..NNLS_MAX_ROUNDS {
        let x = bordered_least_squares(rows, &pins)?;
        let offenders: Vec<usize> = x
            .iter()
            .enumerate()
            .filter(|&(v, &val)| val < NNLS_PIN_THRESHOLD && !pins.contains(&v))
            .map(|(v, _)| v)
            .collect();
        if offenders.is_empty() {
            return Ok(x);
        }
        pins.extend(offenders);
    }
    Err(EquilibriumError::Singular(
        "nonnegative balance solve failed to stabilize".into(),
    ))
}

/// Solve `min ||Ax||` subject to `sum(x) = 1`, with `pinned` variables
/// eliminated (held at exactly zero).
///
/// Rows are equilibrated to unit max-norm so every balance equation carries
/// equal weight, then the stationarity conditions `A'A x = lambda·1`,
/// `1'x = 1` are solved as one bordered dense system. `A'A` is accumulated
/// from the rows' nonzero entries (each balance row touches only a handful of
/// variables), keeping the assembly cost negligible next to the solve.
fn bordered_least_squares(
    rows: &[Vec<f64>],
    pinned: &BTreeSet<usize>,
) -> Result<Vec<f64>, EquilibriumError> {
    let nvars = rows[0].len();
    let mut col_of = vec![usize::MAX; nvars];
    let mut free = Vec::with_capacity(nvars);
    for v in 0..nvars {
        if !pinned.contains(&v) {
            col_of[v] = free.len();
            free.push(v);
        }
    }
    let nf = free.len();

    // Gram matrix of the equilibrated, pin-reduced rows.
    let mut gram = vec![vec![0.0; nf + 1]; nf + 1];
    for row in rows {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        let mut scale = 0.0f64;
        for (v, &c) in row.iter().enumerate() {
            if c != 0.0 && col_of[v] != usize::MAX {
                entries.push((col_of[v], c));
                scale = scale.max(c.abs());
            }
        }
        if entries.is_empty() {
            continue; // a pin row reduces to 0 = 0
        }
        for &(ci, vi) in &entries {
            for &(cj, vj) in &entries {
                gram[ci][cj] += (vi / scale) * (vj / scale);
            }
        }
    }
    // Border with the normalization constraint (Lagrange multiplier column).
    for c in 0..nf {
        gram[c][nf] = 1.0;
        gram[nf][c] = 1.0;
    }
    let mut rhs = vec![0.0; nf + 1];
    rhs[nf] = 1.0;

    let solved = gauss_solve(gram.clone(), rhs.clone())?;
    let residual = max_residual(&gram, &rhs, &solved);
    if residual > 1e-8 {
        return Err(EquilibriumError::ResidualCheck {
            residual,
            threshold: 1e-8,
        });
    }
    let mut x = vec![0.0; nvars];
    for (c, &v) in free.iter().enumerate() {
        x[v] = solved[c];
    }
    Ok(x)
}

/// Drop one balance row, append the normalization row, solve, and verify the
/// solved system's residual. Returns the solution and the dropped row index.
fn solve_normalized(
    rows: &[Vec<f64>],
    drop_candidates: &[usize],
) -> Result<(Vec<f64>, usize), EquilibriumError> {
    let nvars = rows[0].len();
    assert_eq!(rows.len(), nvars, "need exactly one row to drop");
    let mut last_err = None;
    for &drop in drop_candidates {
        let mut a: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != drop)
            .map(|(_, r)| r.clone())
            .collect();
        a.push(vec![1.0; nvars]);
        let mut b = vec![0.0; nvars - 1];
        b.push(1.0);
        match gauss_solve(a.clone(), b.clone()) {
            Ok(x) => {
                let residual = max_residual(&a, &b, &x);
                if residual > 1e-8 {
                    return Err(EquilibriumError::ResidualCheck {
                        residual,
                        threshold: 1e-8,
                    });
                }
                return Ok((x, drop));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| EquilibriumError::Singular("no drop candidate".into())))
}

// ---------------------------------------------------------------------------
// Baseline

/// Solve the movement chain for its stationary distribution.
///
/// The `n + m` balance equations (one per town, one per directed road) sum to
/// zero, so one is redundant: the lowest-id town's row is dropped, the
/// normalization row appended, and the square system solved by Gaussian
/// elimination with partial pivoting. The dropped equation is then verified
/// to hold within 1e-9 — a genuine check here, unlike in the dual systems.
pub fn baseline_equilibrium(
    net: &RoadNetwork,
    params: &MarkovParams,
) -> Result<BaselineDistribution, EquilibriumError> {
    check_preconditions(net, params)?;
    let ix = Indexer::new(net);
    let (n, m) = (ix.n, ix.m());
    let nvars = n + m;

    let mut rows = vec![vec![0.0; nvars]; nvars];
    for i in 0..n {
        rows[i][i] += 1.0 / params.town_wait_s[i];
        for &(j, _) in net.neighbors(i) {
            let e = ix.eidx[&(j, i)];
            rows[i][n + e] -= 1.0 / params.road_wait_s[&(j, i)];
        }
    }
    for (e, &(i, j)) in ix.edges.iter().enumerate() {
        rows[n + e][n + e] += 1.0 / params.road_wait_s[&(i, j)];
        rows[n + e][i] -= 1.0 / (params.town_wait_s[i] * net.degree(i) as f64);
    }

    let (x, dropped) = solve_normalized(&rows, &[0])?;

    // The dropped town's balance must be implied by the rest.
    let dropped_residual: f64 = rows[dropped].iter().zip(&x).map(|(c, v)| c * v).sum();
    if dropped_residual.abs() > 1e-9 {
        return Err(EquilibriumError::ResidualCheck {
            residual: dropped_residual.abs(),
            threshold: 1e-9,
        });
    }

    let mut town = x[..n].to_vec();
    for v in &mut town {
        if *v < 0.0 {
            if *v < NEGATIVE_DUST {
                return Err(EquilibriumError::NegativeProbability { value: *v });
            }
            *v = 0.0;
        }
    }
    let mut road = BTreeMap::new();
    for (e, &key) in ix.edges.iter().enumerate() {
        let mut v = x[n + e];
        if v < 0.0 {
            if v < NEGATIVE_DUST {
                return Err(EquilibriumError::NegativeProbability { value: v });
            }
            v = 0.0;
        }
        road.insert(key, v);
    }
    Ok(BaselineDistribution { town, road })
}

// ---------------------------------------------------------------------------
// Dual (clean/infected) systems

/// Values substituted for the infected occupancies inside the nonlinear
/// terms: the baseline for the linearization, the current iterate for the
/// fixed-point solver.
struct Substitution<'a> {
    town: &'a [f64],
    road: &'a BTreeMap<(usize, usize), f64>,
}

fn assemble_dual_rows(
    net: &RoadNetwork,
    params: &MarkovParams,
    enemy: &BTreeSet<usize>,
    remediation: &BTreeSet<usize>,
    subst: &Substitution,
    ix: &Indexer,
) -> Vec<Vec<f64>> {
    let (n, m) = (ix.n, ix.m());
    let nvars = 2 * (n + m);
    let tc = |i: usize| i;
    let ti = |i: usize| n + i;
    let rc = |e: usize| 2 * n + e;
    let ri = |e: usize| 2 * n + m + e;
    let pow = (params.num_units - 1) as i32;
    let crowd = (params.num_units - 1) as f64;

    // Row order: per town clean then infected, then per directed road clean
    // then infected; `dual_row_of_town` relies on this layout.
    let mut rows = Vec::with_capacity(nvars);
    for i in 0..n {
        let w = params.town_wait_s[i];
        let mut c_row = vec![0.0; nvars];
        let mut i_row = vec![0.0; nvars];
        if enemy.contains(&i) {
            // Stronghold: no clean occupancy; all arrivals pool as infected.
            c_row[tc(i)] = 1.0 / w;
            i_row[ti(i)] += 1.0 / w;
            for &(j, _) in net.neighbors(i) {
                let r = 1.0 / params.road_wait_s[&(j, i)];
                let e = ix.eidx[&(j, i)];
                i_row[rc(e)] -= r;
                i_row[ri(e)] -= r;
            }
        } else if remediation.contains(&i) {
            // Zone: all arrivals pool as clean; no infected occupancy.
            i_row[ti(i)] = 1.0 / w;
            c_row[tc(i)] += 1.0 / w;
            for &(j, _) in net.neighbors(i) {
                let r = 1.0 / params.road_wait_s[&(j, i)];
                let e = ix.eidx[&(j, i)];
                c_row[rc(e)] -= r;
                c_row[ri(e)] -= r;
            }
        } else {
            // Ordinary town: clean arrivals dodge all N-1 others or join the
            // infected pool; residents catch malware from infected arrivals.
            let escape = (1.0 - subst.town[i].clamp(0.0, 1.0)).powi(pow);
            c_row[tc(i)] += 1.0 / w;
            i_row[ti(i)] += 1.0 / w;
            let mut infected_pressure = 0.0;
            for &(j, _) in net.neighbors(i) {
                let r = 1.0 / params.road_wait_s[&(j, i)];
                let e = ix.eidx[&(j, i)];
                c_row[rc(e)] -= r * escape;
                i_row[rc(e)] -= r * (1.0 - escape);
                i_row[ri(e)] -= r;
                infected_pressure += subst.road[&(j, i)].clamp(0.0, 1.0) * r;
            }
            i_row[tc(i)] -= crowd * infected_pressure;
        }
        rows.push(c_row);
        rows.push(i_row);
    }

    for (e, &(i, j)) in ix.edges.iter().enumerate() {
        let r = 1.0 / params.road_wait_s[&(i, j)];
        let depart = 1.0 / (params.town_wait_s[i] * net.degree(i) as f64);
        // Clean traversal survives oncoming infected traffic on the reverse
        // lane; the destination town's infected occupancy pressures the lane.
        let oncoming = subst.road[&(j, i)].clamp(0.0, 1.0);
        let escape = (1.0 - oncoming).powi(pow);
        let dest_pressure =
            subst.town[j].clamp(0.0, 1.0) / (params.town_wait_s[j] * net.degree(j) as f64);

        let mut c_row = vec![0.0; nvars];
        c_row[rc(e)] += r;
        c_row[tc(i)] -= depart * escape;

        let mut i_row = vec![0.0; nvars];
        i_row[ri(e)] += r;
        i_row[tc(i)] -= depart * (1.0 - escape);
        i_row[ti(i)] -= depart;
        i_row[rc(e)] -= crowd * dest_pressure;

        rows.push(c_row);
        rows.push(i_row);
    }
    rows
}

/// Variable indices held at exactly zero in the dual systems: the clean copy
/// of every enemy town and the infected copy of every remediation town.
fn dual_pins(n: usize, enemy: &BTreeSet<usize>, remediation: &BTreeSet<usize>) -> BTreeSet<usize> {
    enemy
        .iter()
        .map(|&i| i)
        .chain(remediation.iter().map(|&i| n + i))
        .collect()
}

fn distribution_from(
    x: &[f64],
    ix: &Indexer,
    enemy: &BTreeSet<usize>,
    remediation: &BTreeSet<usize>,
) -> Result<DualDistribution, EquilibriumError> {
    let (n, m) = (ix.n, ix.m());
    let clean_up = |v: f64| -> Result<f64, EquilibriumError> {
        if v < 0.0 {
            if v < NEGATIVE_DUST {
                return Err(EquilibriumError::NegativeProbability { value: v });
            }
            return Ok(0.0);
        }
        Ok(v)
    };
    let mut town_clean = Vec::with_capacity(n);
    let mut town_infected = Vec::with_capacity(n);
    for i in 0..n {
        // The pinned copies were eliminated, never solved for; they are
        // exactly zero by construction.
        let c = if enemy.contains(&i) { 0.0 } else { clean_up(x[i])? };
        let inf = if remediation.contains(&i) {
            0.0
        } else {
            clean_up(x[n + i])?
        };
        town_clean.push(c);
        town_infected.push(inf);
    }
    let mut road_clean = BTreeMap::new();
    let mut road_infected = BTreeMap::new();
    for (e, &key) in ix.edges.iter().enumerate() {
        road_clean.insert(key, clean_up(x[2 * n + e])?);
        road_infected.insert(key, clean_up(x[2 * n + m + e])?);
    }
    // Clamping pushed the total slightly above 1; rescale back onto the
    // simplex so downstream consumers can rely on unit mass.
    let total: f64 = town_clean.iter().sum::<f64>()
        + town_infected.iter().sum::<f64>()
        + road_clean.values().sum::<f64>()
        + road_infected.values().sum::<f64>();
    if !(total > 0.0) {
        return Err(EquilibriumError::Singular(
            "dual solution carries no probability mass".into(),
        ));
    }
    for v in town_clean
        .iter_mut()
        .chain(town_infected.iter_mut())
        .chain(road_clean.values_mut())
        .chain(road_infected.values_mut())
    {
        *v /= total;
    }
    Ok(DualDistribution {
        town_clean,
        town_infected,
        road_clean,
        road_infected,
    })
}

fn check_dual_preconditions(
    net: &RoadNetwork,
    enemy: &BTreeSet<usize>,
    remediation: &BTreeSet<usize>,
) -> Result<(), EquilibriumError> {
    let n = net.num_towns();
    for &t in enemy.iter().chain(remediation.iter()) {
        if t >= n {
            return Err(EquilibriumError::Precondition(format!(
                "town {t} does not exist"
            )));
        }
    }
    if let Some(t) = enemy.intersection(remediation).next() {
        return Err(EquilibriumError::Precondition(format!(
            "town {t} is both enemy and remediation"
        )));
    }
    Ok(())
}

/// All-clean distribution: the baseline carried entirely by the clean copies.
/// With no enemy towns there is no infection source, so this is the exact
/// dual equilibrium and both dual solvers return it structurally.
fn all_clean(baseline: BaselineDistribution) -> DualDistribution {
    let road_infected = baseline.road.keys().map(|&k| (k, 0.0)).collect();
    DualDistribution {
        town_infected: vec![0.0; baseline.town.len()],
        town_clean: baseline.town,
        road_infected,
        road_clean: baseline.road,
    }
}

/// Solve the linearized clean/infected equilibrium.
///
/// Every infected occupancy inside a nonlinear term — the `(1-x)^(N-1)`
/// escape probabilities and the encounter cross terms — is replaced by the
/// corresponding *baseline* occupancy, an upper bound, making the system
/// linear and the resulting infected fractions conservative (high).
pub fn dual_equilibrium_linearized(
    net: &RoadNetwork,
    params: &MarkovParams,
    enemy: &BTreeSet<usize>,
    remediation: &BTreeSet<usize>,
) -> Result<DualDistribution, EquilibriumError> {
    check_preconditions(net, params)?;
    check_dual_preconditions(net, enemy, remediation)?;
    let baseline = baseline_equilibrium(net, params)?;
    if enemy.is_empty() {
        return Ok(all_clean(baseline));
    }
    let ix = Indexer::new(net);
    let subst = Substitution {
        town: &baseline.town,
        road: &baseline.road,
    };
    let rows = assemble_dual_rows(net, params, enemy, remediation, &subst, &ix);
    let x = solve_least_squares_normalized(&rows, &dual_pins(ix.n, enemy, remediation))?;
    distribution_from(&x, &ix, enemy, remediation)
}

/// Solve the untouched nonlinear equilibrium by damped Picard iteration:
/// freeze the nonlinear occurrences at the current iterate, solve the
/// resulting linear system in least squares subject to unit mass, project
/// the solution onto the simplex (clamp negatives, renormalize), mix
/// half-and-half with the iterate, and repeat until the largest component
/// change drops below 1e-8.
///
/// Non-convergence within 10,000 iterations is an explicit error — callers
/// treating this as an oracle must skip such instances, not guess.
pub fn nonlinear_fixed_point(
    net: &RoadNetwork,
    params: &MarkovParams,
    enemy: &BTreeSet<usize>,
    remediation: &BTreeSet<usize>,
) -> Result<DualDistribution, EquilibriumError> {
    check_preconditions(net, params)?;
    check_dual_preconditions(net, enemy, remediation)?;
    let baseline = baseline_equilibrium(net, params)?;
    if enemy.is_empty() {
        return Ok(all_clean(baseline));
    }
    let ix = Indexer::new(net);
    let (n, m) = (ix.n, ix.m());
    let nvars = 2 * (n + m);
    let pins = dual_pins(n, enemy, remediation);

    // Initial guess: baseline mass split 50/50 between the copies, except at
    // enemy/remediation towns where it is forced entirely to one side.
    let mut cur = vec![0.0; nvars];
    for i in 0..n {
        if enemy.contains(&i) {
            cur[n + i] = baseline.town[i];
        } else if remediation.contains(&i) {
            cur[i] = baseline.town[i];
        } else {
            cur[i] = baseline.town[i] / 2.0;
            cur[n + i] = baseline.town[i] / 2.0;
        }
    }
    for (e, key) in ix.edges.iter().enumerate() {
        cur[2 * n + e] = baseline.road[key] / 2.0;
        cur[2 * n + m + e] = baseline.road[key] / 2.0;
    }

    let mut change = f64::INFINITY;
    for _ in 0..PICARD_MAX_ITERS {
        let town_sub: Vec<f64> = (0..n).map(|i| cur[n + i]).collect();
        let road_sub: BTreeMap<(usize, usize), f64> = ix
            .edges
            .iter()
            .enumerate()
            .map(|(e, &key)| (key, cur[2 * n + m + e]))
            .collect();
        let subst = Substitution {
            town: &town_sub,
            road: &road_sub,
        };
        let rows = assemble_dual_rows(net, params, enemy, remediation, &subst, &ix);
        // Plain least squares, not the pinning loop: the iteration map must
        // stay continuous for the damped iteration to settle, and pinning
        // jumps discontinuously when the active set changes. Negatives are
        // instead removed by the projection below, so the iterates (and the
        // returned distribution) are nonnegative all the same.
        let mut solved = bordered_least_squares(&rows, &pins)?;

        // Keep iterates inside the simplex: clamp stray negatives, renormalize.
        for v in &mut solved {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = solved.iter().sum();
        if !(total > 0.0) {
            return Err(EquilibriumError::Singular(
                "fixed-point iterate collapsed to zero".into(),
            ));
        }
        for v in &mut solved {
            *v /= total;
        }

        change = 0.0;
        let mut next = Vec::with_capacity(nvars);
        for (old, new) in cur.iter().zip(&solved) {
            let mixed = (1.0 - PICARD_DAMPING) * old + PICARD_DAMPING * new;
            change = change.max((mixed - old).abs());
            next.push(mixed);
        }
        let total: f64 = next.iter().sum();
        for v in &mut next {
            *v /= total;
        }
        cur = next;
        if change < PICARD_TOLERANCE {
            return distribution_from(&cur, &ix, enemy, remediation);
        }
    }
    Err(EquilibriumError::NoConvergence {
        iterations: PICARD_MAX_ITERS,
        change,
    })
}

/// Render the linearized system (matrix, right-hand side, solution) as CSV
/// for offline inspection. Rows are labelled by the balance equation they
/// encode, columns by variable.
pub fn dump_dual_system(
    net: &RoadNetwork,
    params: &MarkovParams,
    enemy: &BTreeSet<usize>,
    remediation: &BTreeSet<usize>,
) -> Result<String, EquilibriumError> {
    check_preconditions(net, params)?;
    check_dual_preconditions(net, enemy, remediation)?;
    let baseline = baseline_equilibrium(net, params)?;
    let ix = Indexer::new(net);
    let n = ix.n;

    let mut var_names = Vec::new();
    for i in 0..n {
        var_names.push(format!("clean_town_{i}"));
    }
    for i in 0..n {
        var_names.push(format!("infected_town_{i}"));
    }
    for &(i, j) in &ix.edges {
        var_names.push(format!("clean_road_{i}_{j}"));
    }
    for &(i, j) in &ix.edges {
        var_names.push(format!("infected_road_{i}_{j}"));
    }

    let mut row_names = Vec::new();
    for i in 0..n {
        row_names.push(format!("balance_clean_town_{i}"));
        row_names.push(format!("balance_infected_town_{i}"));
    }
    for &(i, j) in &ix.edges {
        row_names.push(format!("balance_clean_road_{i}_{j}"));
        row_names.push(format!("balance_infected_road_{i}_{j}"));
    }

    let mut out = String::new();
    let solution = if enemy.is_empty() {
        // No infection source: the answer is structural, not solved; there
        // is no meaningful matrix to show.
        out.push_str("note,no enemy towns so the all-clean baseline is exact\n\n");
        let d = all_clean(baseline);
        let mut x = Vec::new();
        x.extend(&d.town_clean);
        x.extend(&d.town_infected);
        x.extend(ix.edges.iter().map(|k| d.road_clean[k]));
        x.extend(ix.edges.iter().map(|k| d.road_infected[k]));
        x
    } else {
        let subst = Substitution {
            town: &baseline.town,
            road: &baseline.road,
        };
        let rows = assemble_dual_rows(net, params, enemy, remediation, &subst, &ix);
        let x = solve_least_squares_normalized(&rows, &dual_pins(n, enemy, remediation))?;
        out.push_str(
            "note,balance rows solved in least squares subject to the normalization row and nonnegativity\n\n",
        );
        out.push_str("row,");
        out.push_str(&var_names.join(","));
        out.push_str(",rhs\n");
        for (k, row) in rows.iter().enumerate() {
            out.push_str(&row_names[k]);
            for v in row {
                out.push_str(&format!(",{v:.12e}"));
            }
            out.push_str(",0\n");
        }
        out.push_str("normalization");
        for _ in 0..var_names.len() {
            out.push_str(",1");
        }
        out.push_str(",1\n\n");
        x
    };
    out.push_str("variable,value\n");
    for (name, v) in var_names.iter().zip(&solution) {
        out.push_str(&format!("{name},{v:.12e}\n"));
    }
    Ok(out)
}
