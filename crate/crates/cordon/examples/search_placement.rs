//! Compare placement searches on one instance: exhaustive enumeration,
//! plain random sampling, the greedy Monte Carlo search, and the
//! uniform-random baseline, all minimizing the equilibrium-predicted
//! infected fraction. Run with `cargo run --example search_placement`.

use cordon::network::{generate, GeneratorConfig};
use cordon::placement::{
    exhaustive, monte_carlo, random_sampling, uniform_baseline, DynSysObjective, ObjectiveFn,
};

fn main() {
    let scenario = generate(&GeneratorConfig {
        num_towns: 12,
        num_enemy: 2,
        num_units: 4,
        seed: 21,
        ..GeneratorConfig::default()
    })
    .unwrap();
    let eligible: Vec<usize> = (0..scenario.network.num_towns())
        .filter(|t| !scenario.enemy_towns.contains(t))
        .collect();
    let k = 2;
    println!(
        "strongholds {:?}; choose {k} zones among {} towns\n",
        scenario.enemy_towns,
        eligible.len()
    );

    let mut objective = DynSysObjective::new(&scenario);

    let best = exhaustive(&mut objective, &eligible, k).unwrap();
    println!(
        "exhaustive      {:?}  f = {:.4}  ({} evaluations)",
        best.remediation,
        best.predicted_value.unwrap(),
        best.evaluations_used
    );

    let sampled = random_sampling(&mut objective, &eligible, k, 15, 1).unwrap();
    println!(
        "random sampling {:?}  f = {:.4}  ({} evaluations)",
        sampled.remediation,
        sampled.predicted_value.unwrap(),
        sampled.evaluations_used
    );

    let greedy = monte_carlo(&mut objective, &eligible, k, 15, 1).unwrap();
    println!(
        "monte carlo     {:?}  f = {:.4}  ({} evaluations)",
        greedy.remediation,
        greedy.predicted_value.unwrap(),
        greedy.evaluations_used
    );

    let baseline = uniform_baseline(&eligible, k, 1).unwrap();
    let baseline_value = objective.value(&baseline.remediation).unwrap();
    println!("uniform random  {:?}  f = {baseline_value:.4}  (no search)", baseline.remediation);

    let optimum = best.predicted_value.unwrap();
    println!("\nrelative gap to the optimum:");
    for (name, value) in [
        ("random sampling", sampled.predicted_value.unwrap()),
        ("monte carlo", greedy.predicted_value.unwrap()),
        ("uniform random", baseline_value),
    ] {
        println!("  {name:<16} {:+.2}%", 100.0 * (value - optimum) / optimum);
    }
}
