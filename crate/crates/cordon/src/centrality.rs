//! Graph-centrality scoring and zone selection.
//!
//! Centrality is the cheap proxy for "which towns matter to traffic": no
//! infection model at all, just graph structure. Two metrics are provided —
//! PageRank and shortest-path betweenness — and two ways of turning scores
//! into a zone set:
//!
//! * top-k: score once, take the k best;
//! * iterative: score, delete the best vertex, rescore the residual graph,
//!   repeat. Deletion captures that once a town is covered by a zone, traffic
//!   "through" it no longer needs covering, so the next pick should answer
//!   the question on the remaining graph.
//!
//! All scoring runs on a [`GraphView`], a road network with some vertices
//! removed. Views may be disconnected or contain isolated vertices; both
//! metrics are total functions on them.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::network::RoadNetwork;

#[derive(Debug, Error)]
pub enum CentralityError {
    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("cannot select {needed} towns: only {available} eligible")]
    Infeasible { needed: usize, available: usize },
}

/// A road network with a subset of towns deleted. Deleting a vertex removes
/// it and all incident roads from every computation on the view.
#[derive(Debug, Clone)]
pub struct GraphView {
    present: Vec<bool>,
    /// (neighbor, travel_time) lists sorted by neighbor id, over all vertices
    /// regardless of presence; presence is filtered at use.
    adj: Vec<Vec<(usize, f64)>>,
}

impl GraphView {
    pub fn from_network(net: &RoadNetwork) -> Self {
        let n = net.num_towns();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for &(j, road) in net.neighbors(i) {
                adj[i].push((j, net.road(road).travel_time));
            }
        }
        GraphView {
            present: vec![true; n],
            adj,
        }
    }

    pub fn delete(&mut self, v: usize) {
        self.present[v] = false;
    }

    pub fn is_present(&self, v: usize) -> bool {
        self.present.get(v).copied().unwrap_or(false)
    }

    pub fn present_vertices(&self) -> Vec<usize> {
        (0..self.present.len()).filter(|&v| self.present[v]).collect()
    }

    fn present_degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|(u, _)| self.present[*u]).count()
    }

    fn present_neighbors<'a>(&'a self, v: usize) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.adj[v].iter().copied().filter(|(u, _)| self.present[*u])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CentralityMetric {
    PageRank {
        damping: f64,
        tolerance: f64,
        max_iters: usize,
    },
    Betweenness {
        /// false = hop count (default), true = travel-time weights.
        travel_time_weighted: bool,
    },
}

impl CentralityMetric {
    pub fn pagerank() -> Self {
        CentralityMetric::PageRank {
            damping: 0.85,
            tolerance: 1e-10,
            max_iters: 1000,
        }
    }

    pub fn betweenness() -> Self {
        CentralityMetric::Betweenness {
            travel_time_weighted: false,
        }
    }
}

/// Score every present vertex of the view under the metric.
pub fn scores(
    view: &GraphView,
    metric: &CentralityMetric,
) -> Result<BTreeMap<usize, f64>, CentralityError> {
    match *metric {
        CentralityMetric::PageRank {
            damping,
            tolerance,
            max_iters,
        } => pagerank(view, damping, tolerance, max_iters),
        CentralityMetric::Betweenness {
            travel_time_weighted,
        } => Ok(if travel_time_weighted {
            betweenness_weighted(view)
        } else {
            betweenness_hops(view)
        }),
    }
}

/// Standard damped PageRank by power iteration, treating each road as a pair
/// of directed links. Mass from isolated (dangling) vertices is spread
/// uniformly over all present vertices, so the result always sums to 1 even
/// on disconnected residual graphs.
fn pagerank(
    view: &GraphView,
    damping: f64,
    tolerance: f64,
    max_iters: usize,
) -> Result<BTreeMap<usize, f64>, CentralityError> {
    let verts = view.present_vertices();
    let np = verts.len();
    if np == 0 {
        return Ok(BTreeMap::new());
    }
    let uniform = 1.0 / np as f64;
    let mut x: BTreeMap<usize, f64> = verts.iter().map(|&v| (v, uniform)).collect();
    let degree: BTreeMap<usize, usize> = verts.iter().map(|&v| (v, view.present_degree(v))).collect();

    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        let dangling: f64 = verts
            .iter()
            .filter(|&&v| degree[&v] == 0)
            .map(|v| x[v])
            .sum();
        let mut next = BTreeMap::new();
        residual = 0.0;
        for &v in &verts {
            let inflow: f64 = view
                .present_neighbors(v)
                .map(|(u, _)| x[&u] / degree[&u] as f64)
                .sum();
            let value = (1.0 - damping) * uniform + damping * (inflow + dangling * uniform);
            residual = residual.max((value - x[&v]).abs());
            next.insert(v, value);
        }
        x = next;
        if residual < tolerance {
            return Ok(x);
        }
    }
    Err(CentralityError::NoConvergence {
        iterations: max_iters,
        residual,
    })
}

/// Brandes' algorithm on hop counts. Scores are unnormalized sums over
/// unordered pairs, endpoints excluded; a pair with several shortest paths
/// contributes fractionally to each interior vertex.
fn betweenness_hops(view: &GraphView) -> BTreeMap<usize, f64> {
    let verts = view.present_vertices();
    let n = view.present.len();
    let mut cb: BTreeMap<usize, f64> = verts.iter().map(|&v| (v, 0.0)).collect();

    for &s in &verts {
        let mut order = Vec::new();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for (v, _) in view.present_neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
                if dist[v] == dist[u] + 1 {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &p in &preds[w] {
                delta[p] += sigma[p] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                *cb.get_mut(&w).unwrap() += delta[w];
            }
        }
    }
    // Each unordered pair was counted from both endpoints.
    for v in cb.values_mut() {
        *v /= 2.0;
    }
    cb
}

/// Brandes over travel-time weights (Dijkstra variant). Distance ties are
/// recognized up to a relative 1e-9 so that numerically equal routes share
/// credit just like equal hop counts do.
fn betweenness_weighted(view: &GraphView) -> BTreeMap<usize, f64> {
    let verts = view.present_vertices();
    let n = view.present.len();
    let mut cb: BTreeMap<usize, f64> = verts.iter().map(|&v| (v, 0.0)).collect();

    for &s in &verts {
        let mut dist = vec![f64::INFINITY; n];
        let mut sigma = vec![0.0f64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut done = vec![false; n];
        let mut order = Vec::new();
        dist[s] = 0.0;
        sigma[s] = 1.0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((NotNan(0.0), s)));
        while let Some(Reverse((NotNan(d), u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            order.push(u);
            for (v, w) in view.present_neighbors(u) {
                if done[v] {
                    continue;
                }
                let nd = d + w;
                let tol = 1e-9 * nd.max(1.0);
                if nd < dist[v] - tol {
                    dist[v] = nd;
                    sigma[v] = sigma[u];
                    preds[v] = vec![u];
                    heap.push(Reverse((NotNan(nd), v)));
                } else if (nd - dist[v]).abs() <= tol {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &p in &preds[w] {
                delta[p] += sigma[p] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                *cb.get_mut(&w).unwrap() += delta[w];
            }
        }
    }
    for v in cb.values_mut() {
        *v /= 2.0;
    }
    cb
}

#[derive(PartialEq, PartialOrd)]
struct NotNan(f64);
impl Eq for NotNan {}
impl Ord for NotNan {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("NaN distance")
    }
}

/// The k highest-scoring towns outside `excluded`, ties to the lowest id.
/// Returned best-first.
pub fn select_topk(
    scores: &BTreeMap<usize, f64>,
    k: usize,
    excluded: &BTreeSet<usize>,
) -> Result<Vec<usize>, CentralityError> {
    let mut ranked: Vec<(usize, f64)> = scores
        .iter()
        .filter(|(v, _)| !excluded.contains(v))
        .map(|(&v, &s)| (v, s))
        .collect();
    if ranked.len() < k {
        return Err(CentralityError::Infeasible {
            needed: k,
            available: ranked.len(),
        });
    }
    // Stable by construction: BTreeMap iterates in id order, sort is stable,
    // so equal scores keep ascending ids.
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("NaN score"));
    Ok(ranked.into_iter().take(k).map(|(v, _)| v).collect())
}

/// Score, take the best non-excluded town, delete it from the graph, and
/// repeat k times on the shrinking residual. Returns towns in deletion order.
pub fn select_iterative(
    net: &RoadNetwork,
    metric: &CentralityMetric,
    k: usize,
    excluded: &BTreeSet<usize>,
) -> Result<Vec<usize>, CentralityError> {
    let mut view = GraphView::from_network(net);
    let eligible = view
        .present_vertices()
        .iter()
        .filter(|v| !excluded.contains(v))
        .count();
    if eligible < k {
        return Err(CentralityError::Infeasible {
            needed: k,
            available: eligible,
        });
    }
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let s = scores(&view, metric)?;
        let best = s
            .iter()
            .filter(|(v, _)| !excluded.contains(v))
            .max_by(|a, b| {
                // Highest score wins; on ties the *lowest* id wins, and
                // BTreeMap order makes the earlier entry survive `>=`… spell
                // it out instead of relying on that.
                a.1.partial_cmp(b.1)
                    .expect("NaN score")
                    .then(b.0.cmp(a.0))
            })
            .map(|(&v, _)| v)
            .expect("eligible count was checked");
        picked.push(best);
        view.delete(best);
    }
    Ok(picked)
}
