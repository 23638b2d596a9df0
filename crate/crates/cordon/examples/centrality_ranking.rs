//! Rank towns by PageRank and betweenness, then compare plain top-k
//! selection with the iterative delete-and-recompute variant. Run with
//! `cargo run --example centrality_ranking`.

use cordon::centrality::{scores, select_iterative, select_topk, CentralityMetric, GraphView};
use cordon::network::{generate, GeneratorConfig};

fn main() {
    let scenario = generate(&GeneratorConfig {
        num_towns: 15,
        num_enemy: 2,
        seed: 7,
        ..GeneratorConfig::default()
    })
    .unwrap();
    let net = &scenario.network;
    let enemy = &scenario.enemy_towns;
    println!("15-town scenario, strongholds {:?} are never selectable\n", enemy);

    for metric in [CentralityMetric::pagerank(), CentralityMetric::betweenness()] {
        let name = match metric {
            CentralityMetric::PageRank { .. } => "pagerank",
            CentralityMetric::Betweenness { .. } => "betweenness",
        };
        let view = GraphView::from_network(net);
        let s = scores(&view, &metric).unwrap();

        let mut ranked: Vec<(usize, f64)> = s.iter().map(|(&t, &v)| (t, v)).collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        println!("{name}: top five towns by score");
        for (t, v) in ranked.iter().take(5) {
            println!("  town {t:>2}  {v:.5}");
        }

        let topk = select_topk(&s, 4, enemy).unwrap();
        let iterative = select_iterative(net, &metric, 4, enemy).unwrap();
        println!("  top-4 selection:       {topk:?}");
        println!("  iterative selection:   {iterative:?}");
        if topk != iterative {
            println!("  (they differ: deleting a town reshapes the ranking)");
        }
        println!();
    }
}
