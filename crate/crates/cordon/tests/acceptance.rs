//! Acceptance gate: eight end-to-end claims about the finished tool, one
//! test per claim, each printing a single `ACCEPTANCE CRITERION n … PASS/FAIL`
//! line (visible with `cargo test --test acceptance -- --nocapture`, and in
//! the failure report otherwise). Every tolerance is pinned as a constant
//! next to the criterion it guards.
//!
//! Two criteria document known model properties rather than code defects,
//! and are expected to fail honestly:
//!
//! * Criterion 2: the linearized equilibrium objective converts clean units
//!   wherever *baseline* traffic is dense, independent of where infection
//!   actually circulates, so on cells with a single stronghold it mis-ranks
//!   placements (hub interception over pocket sealing) and the
//!   equilibrium-guided methods only tie a random control (~50% paired win
//!   rate measured over 30 seeds), below the criterion's 7-of-10 bar.
//! * Criterion 4: the same linearization over-estimates the nonlinear fixed
//!   point in aggregate on almost every instance, but *component-wise*
//!   dominance does not survive the constrained least-squares treatment both
//!   solvers need (their balance equations are inconsistent, and each solve
//!   projects the defect differently).
//!
//! Both tests state their claims verbatim and report measured counts.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use cordon::centrality::{scores, select_topk, CentralityMetric, GraphView};
use cordon::equilibrium::{
    baseline_equilibrium, dual_equilibrium_linearized, nonlinear_fixed_point, MarkovParams,
};
use cordon::harness::{run_cell, Method, MethodOptions, ScenarioFamily};
use cordon::network::{generate, GeneratorConfig, Mobility, Road, RoadNetwork, Town};
use cordon::placement::{exhaustive, monte_carlo, AbmObjective, DynSysObjective, ObjectiveFn};
use cordon::sim::{run_trial_observed, DeploymentModel, Location, SimConfig};
use cordon::Scenario;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(number: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE CRITERION {number} ({name}): {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------- criterion 1

/// Boundary rows of the comparison table are exact: with strongholds and no
/// zones every unit ends up infected (mean 1.000), with zones and no
/// strongholds nothing ever gets infected (mean 0.000), for every method and
/// both mobility models, at the full table scale (35 towns, 5 units,
/// 20 trials x 10,000 steps).
#[test]
fn criterion_1_boundary_rows_are_exact() {
    const TRIALS: usize = 20;
    const STEPS: usize = 10_000;
    const FAMILY_SEED: u64 = 7;

    let start = Instant::now();
    let family = ScenarioFamily::default();
    assert_eq!(family.num_towns, 35, "table scenarios use 35 towns");
    assert_eq!(family.num_units, 5, "table scenarios use 5 units");
    let options = MethodOptions::default();

    let mut bad = Vec::new();
    for mobility in [Mobility::Walk, Mobility::Waypoint] {
        for &method in Method::TABLE.iter() {
            let saturated = run_cell(
                FAMILY_SEED, 5, 0, method, mobility, &family, &options, TRIALS, STEPS,
            )
            .expect("cell (5 strongholds, 0 zones)");
            if saturated.mean_infected_fraction != 1.0 {
                bad.push(format!(
                    "{mobility:?}/{method} at (5,0): {:.6}",
                    saturated.mean_infected_fraction
                ));
            }
            let clean = run_cell(
                FAMILY_SEED, 0, 5, method, mobility, &family, &options, TRIALS, STEPS,
            )
            .expect("cell (0 strongholds, 5 zones)");
            if clean.mean_infected_fraction != 0.0 {
                bad.push(format!(
                    "{mobility:?}/{method} at (0,5): {:.6}",
                    clean.mean_infected_fraction
                ));
            }
        }
    }

    let pass = bad.is_empty();
    let detail = if pass {
        format!(
            "all 36 boundary cells exact (1.000 and 0.000) over {TRIALS} trials x {STEPS} steps, \
             both mobility models, all 9 methods, in {:.1} s",
            start.elapsed().as_secs_f64()
        )
    } else {
        format!("{} boundary cells off: {}", bad.len(), bad.join("; "))
    };
    report(1, "boundary rows exact", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 2

/// Interior rows behave like remediation should: more zones never make things
/// more than noise-worse (slack 0.10 at 20 trials) along 0->1->3->5 zones at
/// 5 strongholds, and fewer strongholds never make things worse along
/// 5->3->1->0 at 5 zones; and at (1 stronghold, 5 zones) under waypoint
/// mobility every non-random method matches or beats the uniform-random
/// baseline in at least 7 of 10 seeded replications (iterative betweenness
/// exempt; ties count as wins since both arms share evaluation seeds).
#[test]
fn criterion_2_interior_rows_monotone_and_beat_baseline() {
    const TRIALS: usize = 20;
    const STEPS: usize = 10_000;
    const SLACK: f64 = 0.10;
    const FAMILY_SEED: u64 = 7;
    const MIN_WINS: usize = 7;

    let start = Instant::now();
    let family = ScenarioFamily::default();
    let options = MethodOptions::default();
    let mut bad = Vec::new();

    // Non-increasing chains. The seven cells walk both sweeps end to end:
    // zones 0->1->3->5 at five strongholds, then strongholds 5->3->1->0 at
    // five zones, sharing the (5,5) corner.
    let chain: [(usize, usize); 7] = [(5, 0), (5, 1), (5, 3), (5, 5), (3, 5), (1, 5), (0, 5)];
    for mobility in [Mobility::Walk, Mobility::Waypoint] {
        for &method in Method::TABLE.iter() {
            let means: Vec<f64> = chain
                .iter()
                .map(|&(inf, rmd)| {
                    run_cell(
                        FAMILY_SEED, inf, rmd, method, mobility, &family, &options, TRIALS, STEPS,
                    )
                    .unwrap_or_else(|e| panic!("cell ({inf},{rmd}) under {method}: {e}"))
                    .mean_infected_fraction
                })
                .collect();
            for w in 0..chain.len() - 1 {
                if means[w + 1] > means[w] + SLACK {
                    bad.push(format!(
                        "{mobility:?}/{method}: {:?} -> {:?} rose {:.3} -> {:.3}",
                        chain[w],
                        chain[w + 1],
                        means[w],
                        means[w + 1]
                    ));
                }
            }
        }
    }

    // Paired baseline comparison at (1 stronghold, 5 zones), waypoint.
    let mut wins = [0usize; 9];
    let baseline_index = Method::TABLE
        .iter()
        .position(|&m| m == Method::UniformRandom)
        .expect("uniform-random sits in the table");
    for seed in 1..=10u64 {
        let means: Vec<f64> = Method::TABLE
            .iter()
            .map(|&method| {
                run_cell(
                    seed, 1, 5, method, Mobility::Waypoint, &family, &options, TRIALS, STEPS,
                )
                .unwrap_or_else(|e| panic!("replication {seed} under {method}: {e}"))
                .mean_infected_fraction
            })
            .collect();
        for (i, &v) in means.iter().enumerate() {
            if v <= means[baseline_index] {
                wins[i] += 1;
            }
        }
    }
    let mut win_report = Vec::new();
    for (i, &method) in Method::TABLE.iter().enumerate() {
        let exempt = method == Method::UniformRandom || method == Method::BetweennessIter;
        win_report.push(format!(
            "{method} {}/10{}",
            wins[i],
            if exempt { " (exempt)" } else { "" }
        ));
        if !exempt && wins[i] < MIN_WINS {
            bad.push(format!(
                "{method} beat the uniform baseline in only {}/10 replications",
                wins[i]
            ));
        }
    }
    println!("baseline wins at (1,5) waypoint: {}", win_report.join(", "));

    let pass = bad.is_empty();
    let detail = if pass {
        format!(
            "126 chain steps non-increasing within {SLACK} and every non-exempt method won \
             >= {MIN_WINS}/10 paired replications, in {:.1} s",
            start.elapsed().as_secs_f64()
        )
    } else {
        format!("{} violations: {}", bad.len(), bad.join("; "))
    };
    report(2, "interior rows monotone, methods beat baseline", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 3

/// The movement-chain solver really solves its equations: every flow-balance
/// row and the normalization hold within 1e-9 on 200 random scenarios, and
/// the distribution matches what a single exponentially-dwelling unit
/// actually does over >= 10^6 simulated seconds (L1 within 0.05).
#[test]
fn criterion_3_baseline_equilibrium_balances_and_matches_simulation() {
    const SCENARIOS: u64 = 200;
    const RESIDUAL_LIMIT: f64 = 1e-9;
    const L1_LIMIT: f64 = 0.05;

    // Algebraic residuals on random instances, n cycling over 4..=35.
    let mut worst_residual = 0.0f64;
    for s in 0..SCENARIOS {
        let n = 4 + (s as usize * 7) % 32;
        let cfg = GeneratorConfig {
            num_towns: n,
            num_enemy: 0,
            budget: 0,
            area_side_m: 20_000.0,
            seed: 9_000 + s,
            ..GeneratorConfig::default()
        };
        let sc = generate(&cfg).expect("generator must handle every size in 4..=35");
        let params = MarkovParams::from_scenario(&sc);
        let b = baseline_equilibrium(&sc.network, &params).expect("baseline solve");
        let net = &sc.network;
        for i in 0..net.num_towns() {
            let departures = b.town[i] / params.town_wait_s[i];
            let arrivals: f64 = net
                .neighbors(i)
                .iter()
                .map(|&(j, _)| b.road[&(j, i)] / params.road_wait_s[&(j, i)])
                .sum();
            worst_residual = worst_residual.max((departures - arrivals).abs());
        }
        for (i, j) in net.directed_edges() {
            let drain = b.road[&(i, j)] / params.road_wait_s[&(i, j)];
            let feed = b.town[i] / (params.town_wait_s[i] * net.degree(i) as f64);
            worst_residual = worst_residual.max((drain - feed).abs());
        }
        worst_residual = worst_residual.max((b.total() - 1.0).abs());
    }
    let balance_ok = worst_residual < RESIDUAL_LIMIT;

    // Empirical occupancy of one unit with exponential dwells (the waiting
    // distribution under which the chain is exact). 6M ticks of 5 s = 3e7
    // simulated seconds.
    let cfg = GeneratorConfig {
        num_towns: 10,
        num_enemy: 0,
        budget: 0,
        num_units: 1,
        area_side_m: 15_000.0,
        deployment_mean_s: 600.0,
        seed: 5,
        ..GeneratorConfig::default()
    };
    let mut scenario = generate(&cfg).expect("10-town scenario");
    scenario.num_units = 1;
    let mut config = SimConfig::default();
    config.tick_s = 5.0;
    config.steps = 6_000_000;
    config.deployment = DeploymentModel::Exponential;
    let params = MarkovParams::from_scenario(&scenario);
    let baseline = baseline_equilibrium(&scenario.network, &params).expect("baseline solve");

    let mut town_ticks = vec![0u64; scenario.network.num_towns()];
    let mut road_ticks: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    run_trial_observed(&scenario, &BTreeSet::new(), &config, 77, &mut |tick, units| {
        if tick == 0 {
            return;
        }
        match &units[0].location {
            Location::Deployed { town, .. } => town_ticks[*town] += 1,
            Location::OnRoad { from, to, .. } => {
                *road_ticks.entry((*from, *to)).or_insert(0) += 1;
            }
        }
    })
    .expect("occupancy trial");
    let total = config.steps as f64;
    let mut l1 = 0.0;
    for (t, &ticks) in town_ticks.iter().enumerate() {
        l1 += (ticks as f64 / total - baseline.town[t]).abs();
    }
    for (edge, &pi) in &baseline.road {
        let ticks = road_ticks.get(edge).copied().unwrap_or(0);
        l1 += (ticks as f64 / total - pi).abs();
    }
    let occupancy_ok = l1 < L1_LIMIT;

    let pass = balance_ok && occupancy_ok;
    let detail = format!(
        "worst balance/normalization residual {worst_residual:.2e} over {SCENARIOS} scenarios \
         (limit {RESIDUAL_LIMIT:.0e}); occupancy L1 {l1:.4} over 3e7 simulated seconds \
         (limit {L1_LIMIT})"
    );
    report(3, "movement equilibrium is correct", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 4

/// The linearized infection model should sit above the nonlinear fixed point
/// component by component (within 1e-6) on at least 40 of 50 small random
/// instances whose fixed-point solve converges. The aggregate version of the
/// claim holds on almost every instance; the component-wise version does not
/// survive the least-squares projection both solvers require, so this test
/// is expected to fail and to say by how much.
#[test]
fn criterion_4_linearization_overestimates_componentwise() {
    const INSTANCES: u64 = 50;
    const REQUIRED: usize = 40;
    const SLACK: f64 = 1e-6;

    let mut converged = 0usize;
    let mut comp_ok = 0usize;
    let mut agg_ok = 0usize;
    let mut worst_shortfall = 0.0f64;
    let mut skipped = Vec::new();

    for s in 0..INSTANCES {
        let n = 4 + (s as usize % 5);
        let cfg = GeneratorConfig {
            num_towns: n,
            num_enemy: 1,
            budget: 1,
            num_units: 2 + (s as usize % 4),
            area_side_m: 15_000.0,
            deployment_mean_s: 1_800.0,
            seed: 500 + s,
            ..GeneratorConfig::default()
        };
        let sc = generate(&cfg).expect("small instance");
        let params = MarkovParams::from_scenario(&sc);
        let zones: BTreeSet<usize> = (0..n)
            .filter(|t| !sc.enemy_towns.contains(t))
            .take(1)
            .collect();
        let fix = match nonlinear_fixed_point(&sc.network, &params, &sc.enemy_towns, &zones) {
            Ok(f) => f,
            Err(e) => {
                skipped.push(format!("instance {s}: fixed point did not converge ({e})"));
                continue;
            }
        };
        let lin = dual_equilibrium_linearized(&sc.network, &params, &sc.enemy_towns, &zones)
            .expect("linearized solve");
        converged += 1;

        let mut shortfall = 0.0f64;
        for i in 0..n {
            shortfall = shortfall.max(fix.town_infected[i] - lin.town_infected[i]);
        }
        for (edge, v) in &fix.road_infected {
            shortfall = shortfall.max(v - lin.road_infected[edge]);
        }
        worst_shortfall = worst_shortfall.max(shortfall);
        if shortfall <= SLACK {
            comp_ok += 1;
        }
        if lin.infected_fraction() >= fix.infected_fraction() - SLACK {
            agg_ok += 1;
        }
    }
    for line in &skipped {
        println!("{line}");
    }

    let pass = comp_ok >= REQUIRED;
    let detail = format!(
        "component-wise over-estimate on {comp_ok}/{converged} converged instances \
         (need >= {REQUIRED} of {INSTANCES}); aggregate over-estimate on {agg_ok}/{converged}; \
         worst component shortfall {worst_shortfall:.3e}; {} non-convergent (logged above)",
        skipped.len()
    );
    report(4, "linearization over-estimates component-wise", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 5

/// Centrality scores agree with brute-force oracles on 100 random graphs
/// (n <= 8): betweenness against exhaustive shortest-path enumeration and
/// PageRank against dense power iteration, both within 1e-9; and the
/// closed-form path/star/clique/cycle cases come out exact.
#[test]
fn criterion_5_centrality_matches_bruteforce_oracles() {
    const GRAPHS: u64 = 100;
    const TOLERANCE: f64 = 1e-9;

    // A tight solver so the comparison tolerance is meaningful.
    let pagerank = CentralityMetric::PageRank {
        damping: 0.85,
        tolerance: 1e-13,
        max_iters: 100_000,
    };

    let mut worst_b = 0.0f64;
    let mut worst_pr = 0.0f64;
    for seed in 0..GRAPHS {
        let n = 3 + (seed as usize % 6);
        let mut rng = ChaCha8Rng::seed_from_u64(40_000 + seed);
        // Path backbone keeps the graph connected; extra chords randomize it.
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        for i in 0..n {
            for j in i + 2..n {
                if rng.gen_bool(0.35) {
                    edges.push((i, j));
                }
            }
        }
        let net = tiny_net(n, &edges);
        let view = GraphView::from_network(&net);

        let b = scores(&view, &CentralityMetric::betweenness()).expect("betweenness");
        let oracle_b = betweenness_by_path_enumeration(&net);
        for v in 0..n {
            worst_b = worst_b.max((b[&v] - oracle_b[v]).abs());
        }

        let pr = scores(&view, &pagerank).expect("pagerank");
        let oracle_pr = pagerank_by_dense_iteration(&net, 0.85);
        for v in 0..n {
            worst_pr = worst_pr.max((pr[&v] - oracle_pr[v]).abs());
        }
    }
    let random_ok = worst_b < TOLERANCE && worst_pr < TOLERANCE;

    // Closed forms. Betweenness counts unordered pairs, endpoints excluded,
    // splitting credit across equal-length shortest paths.
    let mut closed_ok = true;
    let p3 = scores(
        &GraphView::from_network(&tiny_net(3, &[(0, 1), (1, 2)])),
        &CentralityMetric::betweenness(),
    )
    .unwrap();
    closed_ok &= p3[&0] == 0.0 && p3[&1] == 1.0 && p3[&2] == 0.0;

    let star = tiny_net(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
    let star_b = scores(&GraphView::from_network(&star), &CentralityMetric::betweenness()).unwrap();
    closed_ok &= star_b[&0] == 6.0 && (1..5).all(|leaf| star_b[&leaf] == 0.0);
    let star_pr = scores(&GraphView::from_network(&star), &CentralityMetric::pagerank()).unwrap();
    closed_ok &= (star_pr[&0] - 88.0 / 185.0).abs() < TOLERANCE
        && (1..5).all(|leaf| (star_pr[&leaf] - 97.0 / 740.0).abs() < TOLERANCE);

    let k4 = scores(
        &GraphView::from_network(&tiny_net(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])),
        &CentralityMetric::betweenness(),
    )
    .unwrap();
    closed_ok &= (0..4).all(|v| k4[&v] == 0.0);

    let c4 = scores(
        &GraphView::from_network(&tiny_net(4, &[(0, 1), (1, 2), (2, 3), (0, 3)])),
        &CentralityMetric::betweenness(),
    )
    .unwrap();
    closed_ok &= (0..4).all(|v| (c4[&v] - 0.5).abs() < 1e-12);

    let pass = random_ok && closed_ok;
    let detail = format!(
        "worst betweenness gap {worst_b:.2e}, worst pagerank gap {worst_pr:.2e} over {GRAPHS} \
         random graphs (limit {TOLERANCE:.0e}); closed-form path/star/clique/cycle \
         {}",
        if closed_ok { "exact" } else { "WRONG" }
    );
    report(5, "centrality matches brute-force oracles", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 6

/// The greedy Monte Carlo search lands within 5% (relative) of the exhaustive
/// optimum of the equilibrium objective in at least 9 of 10 seeded runs on a
/// 10-town, budget-2 instance at 500 samples per round, in under a minute.
#[test]
fn criterion_6_greedy_search_tracks_the_exhaustive_optimum() {
    const SAMPLES_PER_ROUND: usize = 500;
    const RELATIVE_TOLERANCE: f64 = 0.05;
    const RUNS: u64 = 10;
    const MIN_OK: usize = 9;
    const BUDGET: usize = 2;
    const TIME_LIMIT_S: f64 = 60.0;

    let start = Instant::now();
    let cfg = GeneratorConfig {
        num_towns: 10,
        num_enemy: 2,
        budget: BUDGET,
        num_units: 4,
        area_side_m: 20_000.0,
        deployment_mean_s: 1_800.0,
        seed: 6,
        ..GeneratorConfig::default()
    };
    let sc = generate(&cfg).expect("10-town instance");
    let eligible: Vec<usize> = (0..10).filter(|t| !sc.enemy_towns.contains(t)).collect();
    let mut objective = DynSysObjective::new(&sc);
    let optimum = exhaustive(&mut objective, &eligible, BUDGET)
        .expect("exhaustive search")
        .predicted_value
        .expect("exhaustive always scores");
    assert!(optimum > 0.0, "degenerate instance: optimum is zero");

    let mut ok = 0usize;
    let mut worst_gap = 0.0f64;
    for run in 0..RUNS {
        let found = monte_carlo(&mut objective, &eligible, BUDGET, SAMPLES_PER_ROUND, 1_000 + run)
            .expect("greedy search");
        let value = found.predicted_value.expect("greedy always scores");
        let gap = (value - optimum) / optimum;
        worst_gap = worst_gap.max(gap);
        if gap <= RELATIVE_TOLERANCE {
            ok += 1;
        } else {
            println!(
                "run {run}: greedy {value:.6} vs optimum {optimum:.6} (gap {:.1}%)",
                gap * 100.0
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();

    let pass = ok >= MIN_OK && elapsed < TIME_LIMIT_S;
    let detail = format!(
        "{ok}/{RUNS} runs within {:.0}% of the optimum {optimum:.6} (worst gap {:.2}%), \
         {elapsed:.1} s (limit {TIME_LIMIT_S:.0} s)",
        RELATIVE_TOLERANCE * 100.0,
        worst_gap * 100.0
    );
    report(6, "greedy search tracks the exhaustive optimum", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 7

/// On a map where the busiest hub is the wrong answer — the only stronghold
/// sits on a spur whose sole access is a long-dwell chokepoint — both
/// centrality metrics nominate the hub while the equilibrium-driven and
/// simulation-driven searches both pick the chokepoint, and brute force over
/// every singleton confirms the chokepoint is optimal under both objectives.
#[test]
fn criterion_7_chokepoint_beats_the_hub() {
    const HUB: usize = 0;
    const CHOKEPOINT: usize = 1;

    // Hub 0 with four leaves; spur 0 - 1 - 6; town 6 is the stronghold.
    // The chokepoint dwells long (a garrison town), which raises the payoff
    // for cleaning there — and no centrality metric looks at dwells.
    let towns: Vec<Town> = [
        (0.0, 0.0),
        (6_000.0, 0.0),
        (-3_000.0, 0.0),
        (0.0, 3_000.0),
        (0.0, -3_000.0),
        (-2_000.0, 2_000.0),
        (9_000.0, 0.0),
    ]
    .iter()
    .enumerate()
    .map(|(id, &(x, y))| Town { id, x, y, radius: 500.0 })
    .collect();
    let road = |a: usize, b: usize, length: f64| Road {
        a,
        b,
        length,
        travel_time: length / 10.0,
    };
    let roads = vec![
        road(0, 2, 3_000.0),
        road(0, 3, 3_000.0),
        road(0, 4, 3_000.0),
        road(0, 5, 2_828.0),
        road(0, 1, 6_000.0),
        road(1, 6, 3_000.0),
    ];
    let mut dwells = vec![7_200.0; 7];
    dwells[CHOKEPOINT] = 28_800.0;
    let scenario = Scenario {
        network: RoadNetwork::new(towns, roads).expect("hand-built map"),
        enemy_towns: [6].into_iter().collect(),
        budget: 1,
        num_units: 1,
        deployment_mean_s: 7_200.0,
        deployment_means_s: Some(dwells),
        mobility: Mobility::Walk,
        unit_speed_mps: 10.0,
        seed: 0,
    };
    let enemy = scenario.enemy_towns.clone();
    let eligible: Vec<usize> = (0..7).filter(|t| !enemy.contains(t)).collect();
    let view = GraphView::from_network(&scenario.network);

    let pagerank_pick = select_topk(
        &scores(&view, &CentralityMetric::pagerank()).expect("pagerank"),
        1,
        &enemy,
    )
    .expect("top-1")[0];
    let betweenness_pick = select_topk(
        &scores(&view, &CentralityMetric::betweenness()).expect("betweenness"),
        1,
        &enemy,
    )
    .expect("top-1")[0];

    let chokepoint_only: BTreeSet<usize> = [CHOKEPOINT].into_iter().collect();
    let mut dynsys = DynSysObjective::new(&scenario);
    let dynsys_pick = exhaustive(&mut dynsys, &eligible, 1).expect("exhaustive equilibrium");
    let mut config = SimConfig::default();
    config.steps = 5_000;
    config.eval_trials = 200;
    let mut abm = AbmObjective::new(&scenario, config, 7);
    let abm_pick = exhaustive(&mut abm, &eligible, 1).expect("exhaustive simulation");

    // Brute force over every singleton under both objectives.
    let mut table = Vec::new();
    let mut dynsys_best = (usize::MAX, f64::INFINITY);
    let mut abm_best = (usize::MAX, f64::INFINITY);
    for &t in &eligible {
        let set: BTreeSet<usize> = [t].into_iter().collect();
        let dv = dynsys.value(&set).expect("equilibrium value");
        let av = abm.value(&set).expect("simulated value");
        if dv < dynsys_best.1 {
            dynsys_best = (t, dv);
        }
        if av < abm_best.1 {
            abm_best = (t, av);
        }
        table.push(format!("zone {t}: equilibrium {dv:.4}, simulated {av:.3}"));
    }
    println!("singleton brute force: {}", table.join("; "));

    let pass = pagerank_pick == HUB
        && betweenness_pick == HUB
        && dynsys_pick.remediation == chokepoint_only
        && abm_pick.remediation == chokepoint_only
        && dynsys_best.0 == CHOKEPOINT
        && abm_best.0 == CHOKEPOINT;
    let detail = format!(
        "pagerank picked {pagerank_pick}, betweenness picked {betweenness_pick} (hub is {HUB}); \
         equilibrium search picked {:?}, simulation search picked {:?} (chokepoint is \
         {CHOKEPOINT}); brute-force optima: equilibrium at {} ({:.4}), simulation at {} ({:.3})",
        dynsys_pick.remediation,
        abm_pick.remediation,
        dynsys_best.0,
        dynsys_best.1,
        abm_best.0,
        abm_best.1
    );
    report(7, "searches find the chokepoint, centrality finds the hub", pass, &detail);
    assert!(pass, "{detail}");
}

// ---------------------------------------------------------------- criterion 8

/// Repeating any CLI invocation with identical flags and seed produces
/// byte-identical output — scenario files, selection JSON, evaluation JSON,
/// and experiment CSV (excluding the two wall-clock columns) — including when
/// two invocations run concurrently.
#[test]
fn criterion_8_cli_output_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_cordon");
    let dir = tempfile::tempdir().expect("tempdir");
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let run = |args: &[&str]| -> String {
        let out = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("spawn cordon");
        assert!(
            out.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).expect("utf-8 stdout")
    };
    let mut mismatches = Vec::new();

    // generate: identical stdout and identical scenario files when invoked
    // twice with the very same flags (including the output path).
    let a = p("a.json");
    let gen_args = ["generate", "--n", "12", "--enemy", "2", "--seed", "9", "--out", &a];
    let gen_1 = run(&gen_args);
    let first_scenario = std::fs::read(&a).unwrap();
    let gen_2 = run(&gen_args);
    if gen_1 != gen_2 {
        mismatches.push("generate stdout".to_owned());
    }
    if first_scenario != std::fs::read(&a).unwrap() {
        mismatches.push("generate scenario file".to_owned());
    }

    // select: identical JSON, and its zones feed the evaluate check below.
    let select_args = ["select", "--scenario", &a, "--method", "dynsys-mc", "--k", "2", "--seed", "3"];
    let sel_1 = run(&select_args);
    let sel_2 = run(&select_args);
    if sel_1 != sel_2 {
        mismatches.push("select stdout".to_owned());
    }
    let sel_json: serde_json::Value = serde_json::from_str(&sel_1).expect("selection JSON");
    let zones = sel_json["remediation"]
        .as_array()
        .expect("remediation list")
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");

    // evaluate: identical JSON.
    let eval_args = [
        "evaluate", "--scenario", &a, "--remediation", &zones, "--trials", "5", "--steps",
        "1000", "--seed", "2",
    ];
    if run(&eval_args) != run(&eval_args) {
        mismatches.push("evaluate stdout".to_owned());
    }

    // experiment: identical CSV once the two wall-clock columns are dropped,
    // for two serial runs and two concurrent ones.
    let grid = p("grid.json");
    std::fs::write(
        &grid,
        r#"{
            "infection_counts": [2],
            "remediation_counts": [2],
            "methods": ["pagerank-iter", "dynsys-mc", "abm-basic", "uniform-random"],
            "mobility": "walk",
            "trials": 5,
            "steps": 500,
            "seeds": [4, 5]
        }"#,
    )
    .unwrap();
    let strip_clocks = |csv: &str| -> String {
        csv.lines()
            .map(|l| l.rsplitn(3, ',').nth(2).unwrap_or(l).to_owned())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let experiment_args = |out: &str| -> Vec<String> {
        ["experiment", "--grid", &grid, "--out", out, "--n", "12", "--units", "3"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    };
    let (c1, c2, c3, c4) = (p("r1.csv"), p("r2.csv"), p("r3.csv"), p("r4.csv"));
    run(&experiment_args(&c1).iter().map(String::as_str).collect::<Vec<_>>());
    run(&experiment_args(&c2).iter().map(String::as_str).collect::<Vec<_>>());
    let serial_1 = strip_clocks(&std::fs::read_to_string(&c1).unwrap());
    let serial_2 = strip_clocks(&std::fs::read_to_string(&c2).unwrap());
    if serial_1 != serial_2 {
        mismatches.push("experiment CSV (serial repeat)".to_owned());
    }

    let spawn = |out: &str| {
        std::process::Command::new(bin)
            .args(experiment_args(out))
            .stdout(std::process::Stdio::null())
            .spawn()
            .expect("spawn concurrent experiment")
    };
    let mut h1 = spawn(&c3);
    let mut h2 = spawn(&c4);
    assert!(h1.wait().expect("wait").success(), "concurrent run 1 failed");
    assert!(h2.wait().expect("wait").success(), "concurrent run 2 failed");
    for (path, label) in [(&c3, "experiment CSV (concurrent run 1)"), (&c4, "experiment CSV (concurrent run 2)")] {
        if strip_clocks(&std::fs::read_to_string(path).unwrap()) != serial_1 {
            mismatches.push(label.to_owned());
        }
    }

    let pass = mismatches.is_empty();
    let detail = if pass {
        "generate/select/evaluate byte-identical; experiment CSV identical up to wall-clock \
         columns across serial and concurrent repeats"
            .to_owned()
    } else {
        format!("outputs differed: {}", mismatches.join(", "))
    };
    report(8, "CLI output is deterministic", pass, &detail);
    assert!(pass, "{detail}");
}

// ------------------------------------------------------------------- helpers

fn tiny_net(n: usize, edges: &[(usize, usize)]) -> RoadNetwork {
    let towns = (0..n)
        .map(|id| Town { id, x: id as f64 * 1_000.0, y: 0.0, radius: 100.0 })
        .collect();
    let roads = edges
        .iter()
        .map(|&(a, b)| Road { a, b, length: 1_000.0, travel_time: 100.0 })
        .collect();
    RoadNetwork::new(towns, roads).expect("test graph")
}

/// Betweenness the slow, unarguable way: enumerate every simple path between
/// every unordered pair, keep the shortest ones, and split one unit of credit
/// per pair across their interior vertices.
fn betweenness_by_path_enumeration(net: &RoadNetwork) -> Vec<f64> {
    let n = net.num_towns();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| net.neighbors(i).iter().map(|&(j, _)| j).collect())
        .collect();
    let mut credit = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let mut paths = Vec::new();
            let mut stack = vec![s];
            collect_simple_paths(&adj, s, t, &mut stack, &mut paths);
            let Some(best) = paths.iter().map(|p| p.len()).min() else {
                continue;
            };
            let shortest: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == best).collect();
            let sigma = shortest.len() as f64;
            for path in shortest {
                for &v in &path[1..path.len() - 1] {
                    credit[v] += 1.0 / sigma;
                }
            }
        }
    }
    credit
}

fn collect_simple_paths(
    adj: &[Vec<usize>],
    cur: usize,
    target: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if cur == target {
        out.push(stack.clone());
        return;
    }
    for &next in &adj[cur] {
        if stack.contains(&next) {
            continue;
        }
        stack.push(next);
        collect_simple_paths(adj, next, target, stack, out);
        stack.pop();
    }
}

/// PageRank the slow, unarguable way: dense power iteration on the full
/// transition matrix to far below the comparison tolerance. The graphs here
/// are connected, so no dangling-vertex handling is needed.
fn pagerank_by_dense_iteration(net: &RoadNetwork, damping: f64) -> Vec<f64> {
    let n = net.num_towns();
    let uniform = 1.0 / n as f64;
    let mut x = vec![uniform; n];
    for _ in 0..1_000_000 {
        let mut next = vec![(1.0 - damping) * uniform; n];
        for u in 0..n {
            let share = damping * x[u] / net.degree(u) as f64;
            for &(v, _) in net.neighbors(u) {
                next[v] += share;
            }
        }
        let delta = x
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        x = next;
        if delta < 1e-15 {
            break;
        }
    }
    x
}
