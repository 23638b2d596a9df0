//! Road networks, scenarios, and the random scenario generator.
//!
//! A scenario is a connected undirected graph of towns plus the parameters
//! that drive the models: which towns are enemy strongholds, how many
//! remediation zones the defender may place, how many units patrol, how long
//! they stay deployed, and how they pick their next destination.
//!
//! Scenarios serialize to a small JSON format (see `load_scenario`); the
//! parser is strict — unknown keys, duplicate roads, and dangling town
//! references are errors, so a typo in a config file fails loudly instead of
//! silently changing the experiment.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no path between towns {src} and {dst}")]
    Unreachable { src: usize, dst: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A town is a circular region; units deployed there sit at its center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Town {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl Town {
    pub fn distance_to(&self, other: &Town) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// An undirected road between two towns. `travel_time` is the one-way
/// traversal time in seconds; when absent in a file it is derived from the
/// road length and the scenario's unit speed.
#[derive(Debug, Clone, PartialEq)]
pub struct Road {
    pub a: usize,
    pub b: usize,
    pub length: f64,
    pub travel_time: f64,
}

impl Road {
    /// The endpoint opposite `town`.
    pub fn other_end(&self, town: usize) -> usize {
        if town == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Towns plus roads, with an adjacency index. Construction normalizes road
/// endpoints to `a < b` and rejects structurally broken inputs (non-contiguous
/// ids, self-loops, duplicate roads); everything softer is reported by
/// [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    towns: Vec<Town>,
    roads: Vec<Road>,
    /// adj[i] = (neighbor town, road index), sorted by neighbor id.
    adj: Vec<Vec<(usize, usize)>>,
}

impl RoadNetwork {
    pub fn new(mut towns: Vec<Town>, roads: Vec<Road>) -> Result<Self, NetworkError> {
        towns.sort_by_key(|t| t.id);
        let n = towns.len();
        for (pos, t) in towns.iter().enumerate() {
            if t.id != pos {
                return Err(NetworkError::Parse(format!(
                    "town ids must be exactly 0..{} with no gaps or repeats (found id {})",
                    n.saturating_sub(1),
                    t.id
                )));
            }
        }
        let mut normalized = Vec::with_capacity(roads.len());
        let mut seen = BTreeSet::new();
        for r in roads {
            if r.a >= n || r.b >= n {
                return Err(NetworkError::Parse(format!(
                    "road references unknown town {}",
                    r.a.max(r.b)
                )));
            }
            if r.a == r.b {
                return Err(NetworkError::Parse(format!(
                    "road from town {} to itself",
                    r.a
                )));
            }
            let (a, b) = (r.a.min(r.b), r.a.max(r.b));
            if !seen.insert((a, b)) {
                return Err(NetworkError::Parse(format!(
                    "duplicate road between towns {a} and {b}"
                )));
            }
            normalized.push(Road { a, b, ..r });
        }
        let mut adj = vec![Vec::new(); n];
        for (idx, r) in normalized.iter().enumerate() {
            adj[r.a].push((r.b, idx));
            adj[r.b].push((r.a, idx));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(RoadNetwork {
            towns,
            roads: normalized,
            adj,
        })
    }

    pub fn num_towns(&self) -> usize {
        self.towns.len()
    }

    pub fn num_roads(&self) -> usize {
        self.roads.len()
    }

    pub fn town(&self, id: usize) -> &Town {
        &self.towns[id]
    }

    pub fn towns(&self) -> &[Town] {
        &self.towns
    }

    pub fn road(&self, idx: usize) -> &Road {
        &self.roads[idx]
    }

    pub fn roads(&self) -> &[Road] {
        &self.roads
    }

    pub fn degree(&self, town: usize) -> usize {
        self.adj[town].len()
    }

    /// Neighbors of `town` as (neighbor id, road index), sorted by id.
    pub fn neighbors(&self, town: usize) -> &[(usize, usize)] {
        &self.adj[town]
    }

    pub fn road_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adj[a]
            .iter()
            .find(|(nb, _)| *nb == b)
            .map(|(_, idx)| *idx)
    }

    /// Every road in both directions, sorted by (from, to). The Markov models
    /// treat each direction of travel as a distinct state.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(2 * self.roads.len());
        for r in &self.roads {
            out.push((r.a, r.b));
            out.push((r.b, r.a));
        }
        out.sort_unstable();
        out
    }

    pub fn is_connected(&self) -> bool {
        let n = self.towns.len();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// Minimum-travel-time path from `src` to `dst`, inclusive of both ends.
    /// Among equal-time paths the lexicographically smallest town-id sequence
    /// wins, so itineraries are reproducible across runs and platforms.
    pub fn shortest_path(&self, src: usize, dst: usize) -> Result<(Vec<usize>, f64), NetworkError> {
        let n = self.towns.len();
        if src >= n || dst >= n {
            return Err(NetworkError::InvalidArgument(format!(
                "town {} does not exist",
                src.max(dst)
            )));
        }
        if src == dst {
            return Ok((vec![src], 0.0));
        }
        // Dijkstra from the destination so the reconstruction below can walk
        // forward from src picking the smallest viable neighbor first.
        let dist = self.dijkstra_from(dst);
        if !dist[src].is_finite() {
            return Err(NetworkError::Unreachable { src, dst });
        }
        let mut path = vec![src];
        let mut cur = src;
        let mut hops = 0;
        while cur != dst {
            hops += 1;
            if hops > n {
                return Err(NetworkError::InvalidArgument(
                    "shortest path reconstruction failed (non-positive travel time?)".into(),
                ));
            }
            let mut next = None;
            for &(v, road) in &self.adj[cur] {
                let step = self.roads[road].travel_time;
                let slack = 1e-9 * dist[cur].max(1.0);
                if (step + dist[v] - dist[cur]).abs() <= slack {
                    next = Some(v);
                    break; // adjacency is id-sorted: first hit is lexicographic min
                }
            }
            match next {
                Some(v) => {
                    path.push(v);
                    cur = v;
                }
                None => {
                    return Err(NetworkError::InvalidArgument(
                        "shortest path reconstruction failed".into(),
                    ))
                }
            }
        }
        Ok((path, dist[src]))
    }

    fn dijkstra_from(&self, source: usize) -> Vec<f64> {
        let n = self.towns.len();
        let mut dist = vec![f64::INFINITY; n];
        dist[source] = 0.0;
        let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
        heap.push(Reverse((OrdF64(0.0), source)));
        while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, road) in &self.adj[u] {
                let nd = d + self.roads[road].travel_time;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Reverse((OrdF64(nd), v)));
                }
            }
        }
        dist
    }
}

/// f64 wrapper with a total order; travel times are finite and non-NaN by the
/// time they reach a heap.
#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("NaN in priority queue")
    }
}

/// How a unit picks where to go when its deployment ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mobility {
    /// Uniform random neighbor, one road at a time.
    Walk,
    /// Uniform random town anywhere on the map, travelling the shortest path.
    Waypoint,
}

/// A full problem instance: the map plus every knob the models need.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub network: RoadNetwork,
    pub enemy_towns: BTreeSet<usize>,
    /// Number of remediation zones the defender may place.
    pub budget: usize,
    pub num_units: usize,
    /// Mean deployment dwell time, seconds, for every town.
    pub deployment_mean_s: f64,
    /// Optional per-town dwell overrides (indexed by town id).
    pub deployment_means_s: Option<Vec<f64>>,
    pub mobility: Mobility,
    pub unit_speed_mps: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn deployment_mean_at(&self, town: usize) -> f64 {
        match &self.deployment_means_s {
            Some(v) if town < v.len() => v[town],
            _ => self.deployment_mean_s,
        }
    }
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoadSpec {
    a: usize,
    b: usize,
    length: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    travel_time: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    towns: Vec<Town>,
    roads: Vec<RoadSpec>,
    enemy_towns: Vec<usize>,
    budget: usize,
    num_units: usize,
    deployment_mean_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    deployment_means_s: Option<Vec<f64>>,
    mobility: Mobility,
    unit_speed_mps: f64,
    seed: u64,
}

pub fn load_scenario_str(text: &str) -> Result<Scenario, NetworkError> {
    let file: ScenarioFile =
        serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
    let n = file.towns.len();
    let roads = file
        .roads
        .into_iter()
        .map(|r| {
            let travel_time = r.travel_time.unwrap_or_else(|| {
                if file.unit_speed_mps > 0.0 {
                    r.length / file.unit_speed_mps
                } else {
                    f64::NAN
                }
            });
            Road {
                a: r.a,
                b: r.b,
                length: r.length,
                travel_time,
            }
        })
        .collect();
    let network = RoadNetwork::new(file.towns, roads)?;
    for &e in &file.enemy_towns {
        if e >= n {
            return Err(NetworkError::Parse(format!(
                "enemy town {e} does not exist"
            )));
        }
    }
    Ok(Scenario {
        network,
        enemy_towns: file.enemy_towns.into_iter().collect(),
        budget: file.budget,
        num_units: file.num_units,
        deployment_mean_s: file.deployment_mean_s,
        deployment_means_s: file.deployment_means_s,
        mobility: file.mobility,
        unit_speed_mps: file.unit_speed_mps,
        seed: file.seed,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, NetworkError> {
    load_scenario_str(&fs::read_to_string(path)?)
}

/// Canonical JSON form: towns by id, roads in stored order with explicit
/// travel times. `load_scenario_str(save_scenario(s))` reproduces `s` exactly.
pub fn save_scenario(scenario: &Scenario) -> String {
    let file = ScenarioFile {
        towns: scenario.network.towns().to_vec(),
        roads: scenario
            .network
            .roads()
            .iter()
            .map(|r| RoadSpec {
                a: r.a,
                b: r.b,
                length: r.length,
                travel_time: Some(r.travel_time),
            })
            .collect(),
        enemy_towns: scenario.enemy_towns.iter().copied().collect(),
        budget: scenario.budget,
        num_units: scenario.num_units,
        deployment_mean_s: scenario.deployment_mean_s,
        deployment_means_s: scenario.deployment_means_s.clone(),
        mobility: scenario.mobility,
        unit_speed_mps: scenario.unit_speed_mps,
        seed: scenario.seed,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("scenario serialization");
    text.push('\n');
    text
}

pub fn save_scenario_to(path: &Path, scenario: &Scenario) -> Result<(), NetworkError> {
    fs::write(path, save_scenario(scenario))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Validation

/// Every semantic problem with a scenario, as human-readable strings in a
/// stable order. An empty vector means the scenario is fit for all models.
pub fn validate(scenario: &Scenario) -> Vec<String> {
    let mut out = Vec::new();
    let net = &scenario.network;
    let n = net.num_towns();

    if scenario.num_units < 1 {
        out.push("num_units must be at least 1".to_string());
    }
    for t in net.towns() {
        if !(t.radius > 0.0) {
            out.push(format!("radius not positive at town {}", t.id));
        }
    }
    if !(scenario.deployment_mean_s > 0.0) {
        out.push("deployment mean not positive".to_string());
    }
    if let Some(means) = &scenario.deployment_means_s {
        if means.len() != n {
            out.push(format!(
                "deployment mean overrides have {} entries for {} towns",
                means.len(),
                n
            ));
        }
        for (i, &m) in means.iter().enumerate() {
            if !(m > 0.0) {
                out.push(format!("deployment mean not positive at town {i}"));
            }
        }
    }
    if !(scenario.unit_speed_mps > 0.0) {
        out.push("unit speed not positive".to_string());
    }
    for r in net.roads() {
        if !(r.length > 0.0) {
            out.push(format!("length not positive on road {}-{}", r.a, r.b));
        }
        if !(r.travel_time > 0.0) {
            out.push(format!("travel time not positive on road {}-{}", r.a, r.b));
        }
    }
    if !net.is_connected() {
        out.push("graph not connected".to_string());
    }
    for id in 0..n {
        if net.degree(id) == 0 {
            out.push(format!("degree 0 at town {id}"));
        }
    }
    for &e in &scenario.enemy_towns {
        if e >= n {
            out.push(format!("enemy town {e} does not exist"));
        }
    }
    if scenario.budget > n.saturating_sub(scenario.enemy_towns.len()) {
        out.push("budget exceeds number of non-enemy towns".to_string());
    }
    out
}

// ---------------------------------------------------------------------------
// Generation

/// Knobs for the random scenario generator. Defaults describe the reference
/// setting used throughout the tests and examples: 35 towns on a 50 km
/// square, mean degree ~4, 5 units dwelling two hours per deployment.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub num_towns: usize,
    pub num_enemy: usize,
    pub budget: usize,
    pub num_units: usize,
    pub area_side_m: f64,
    pub town_radius_m: f64,
    pub target_mean_degree: f64,
    pub unit_speed_mps: f64,
    pub deployment_mean_s: f64,
    pub mobility: Mobility,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            num_towns: 35,
            num_enemy: 5,
            budget: 5,
            num_units: 5,
            area_side_m: 50_000.0,
            town_radius_m: 500.0,
            target_mean_degree: 4.0,
            unit_speed_mps: 10.0,
            deployment_mean_s: 7_200.0,
            mobility: Mobility::Walk,
            seed: 0,
        }
    }
}

/// Generate a connected random scenario: towns uniform in the square, roads
/// between all pairs closer than a radius chosen to hit the target mean
/// degree, then a greedy repair that links components through their closest
/// town pair until the graph is connected. Deterministic in `config.seed`.
pub fn generate(config: &GeneratorConfig) -> Result<Scenario, NetworkError> {
    let n = config.num_towns;
    if n < 2 {
        return Err(NetworkError::InvalidArgument(
            "need at least 2 towns".to_string(),
        ));
    }
    if config.num_enemy > n {
        return Err(NetworkError::InvalidArgument(format!(
            "{} enemy towns requested but only {} towns",
            config.num_enemy, n
        )));
    }
    if config.budget > n - config.num_enemy {
        return Err(NetworkError::InvalidArgument(format!(
            "budget {} exceeds the {} non-enemy towns",
            config.budget,
            n - config.num_enemy
        )));
    }
    if !(config.area_side_m > 0.0)
        || !(config.town_radius_m > 0.0)
        || !(config.unit_speed_mps > 0.0)
        || !(config.deployment_mean_s > 0.0)
        || !(config.target_mean_degree > 0.0)
    {
        return Err(NetworkError::InvalidArgument(
            "geometry and timing parameters must be positive".to_string(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let towns: Vec<Town> = (0..n)
        .map(|id| Town {
            id,
            x: rng.gen_range(0.0..config.area_side_m),
            y: rng.gen_range(0.0..config.area_side_m),
            radius: config.town_radius_m,
        })
        .collect();

    // For uniform points, E[degree] ≈ (n-1) * pi * r^2 / area.
    let area = config.area_side_m * config.area_side_m;
    let rgg_radius =
        (config.target_mean_degree * area / (std::f64::consts::PI * (n - 1) as f64)).sqrt();

    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if towns[i].distance_to(&towns[j]) <= rgg_radius {
                edges.insert((i, j));
            }
        }
    }

    // Connectivity repair: repeatedly add the globally shortest edge that
    // bridges two components (ties broken by lowest (i, j)).
    let mut component = components_of(n, &edges);
    loop {
        let distinct: BTreeSet<usize> = component.iter().copied().collect();
        if distinct.len() <= 1 {
            break;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                if component[i] == component[j] {
                    continue;
                }
                let d = towns[i].distance_to(&towns[j]);
                let better = match best {
                    None => true,
                    Some((bd, bi, bj)) => d < bd || (d == bd && (i, j) < (bi, bj)),
                };
                if better {
                    best = Some((d, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("disconnected graph must have a bridging pair");
        edges.insert((i, j));
        component = components_of(n, &edges);
    }

    let roads: Vec<Road> = edges
        .into_iter()
        .map(|(a, b)| {
            let length = towns[a].distance_to(&towns[b]);
            Road {
                a,
                b,
                length,
                travel_time: length / config.unit_speed_mps,
            }
        })
        .collect();

    // Enemy towns: seeded partial Fisher-Yates over the id range.
    let mut ids: Vec<usize> = (0..n).collect();
    for t in 0..config.num_enemy {
        let pick = rng.gen_range(t..n);
        ids.swap(t, pick);
    }
    let enemy_towns: BTreeSet<usize> = ids[..config.num_enemy].iter().copied().collect();

    let network = RoadNetwork::new(towns, roads)?;
    Ok(Scenario {
        network,
        enemy_towns,
        budget: config.budget,
        num_units: config.num_units,
        deployment_mean_s: config.deployment_mean_s,
        deployment_means_s: None,
        mobility: config.mobility,
        unit_speed_mps: config.unit_speed_mps,
        seed: config.seed,
    })
}

fn components_of(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    comp
}
