//! A constructed map where raw centrality picks the wrong town. Hub A is the
//! busiest place on the map, but the single enemy stronghold sits on a spur
//! whose only access is the chokepoint B: whatever gets infected out there
//! must come back through B. A zone at B intercepts all of it; a zone at A
//! only catches what the hub happens to see, and by then the unit has carried
//! the infection across half the map. Run with
//! `cargo run --example chokepoint_vs_hub`.

use cordon::centrality::{scores, select_topk, CentralityMetric, GraphView};
use cordon::network::{Mobility, Road, RoadNetwork, Town};
use cordon::placement::{exhaustive, AbmObjective, DynSysObjective, ObjectiveFn};
use cordon::sim::SimConfig;
use cordon::Scenario;

fn main() {
    // Hub A (0) with four leaves; spur A - B(1) - E(6); E is the stronghold.
    // B dwells are long (a garrison town), which raises the payoff for
    // cleaning there — but none of the centrality metrics look at dwells.
    let towns: Vec<Town> = [
        (0.0, 0.0),       // 0: hub A
        (6_000.0, 0.0),   // 1: chokepoint B
        (-3_000.0, 0.0),  // 2..5: leaves of A
        (0.0, 3_000.0),
        (0.0, -3_000.0),
        (-2_000.0, 2_000.0),
        (9_000.0, 0.0),   // 6: enemy spur town E
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
    dwells[1] = 28_800.0;
    let scenario = Scenario {
        network: RoadNetwork::new(towns, roads).unwrap(),
        enemy_towns: [6].into_iter().collect(),
        budget: 1,
        num_units: 1,
        deployment_mean_s: 7_200.0,
        deployment_means_s: Some(dwells),
        mobility: Mobility::Walk,
        unit_speed_mps: 10.0,
        seed: 0,
    };
    let enemy = &scenario.enemy_towns;
    let eligible: Vec<usize> = (0..7).filter(|t| !enemy.contains(t)).collect();

    println!("who do the centrality metrics nominate?");
    for metric in [CentralityMetric::pagerank(), CentralityMetric::betweenness()] {
        let name = match metric {
            CentralityMetric::PageRank { .. } => "pagerank   ",
            CentralityMetric::Betweenness { .. } => "betweenness",
        };
        let s = scores(&GraphView::from_network(&scenario.network), &metric).unwrap();
        let pick = select_topk(&s, 1, enemy).unwrap()[0];
        println!("  {name} -> town {pick} (score {:.4})", s[&pick]);
    }

    println!("\nwhat does each single zone actually achieve (equilibrium model)?");
    let mut dynsys = DynSysObjective::new(&scenario);
    let best_dynsys = exhaustive(&mut dynsys, &eligible, 1).unwrap();
    for &t in &eligible {
        let f = dynsys.value(&[t].into_iter().collect()).unwrap();
        let marker = if best_dynsys.remediation.contains(&t) {
            "  <- best"
        } else {
            ""
        };
        println!("  zone at {t}: predicted infected fraction {f:.4}{marker}");
    }

    let mut config = SimConfig::default();
    config.steps = 5_000;
    config.eval_trials = 200;
    let mut abm = AbmObjective::new(&scenario, config, 7);
    let best_abm = exhaustive(&mut abm, &eligible, 1).unwrap();
    println!(
        "\nagent-based search agrees: best zone {:?} (simulated fraction {:.3})",
        best_abm.remediation,
        best_abm.predicted_value.unwrap()
    );
    println!("\nthe hub is busy, but the chokepoint is where the infection funnels through");
}
