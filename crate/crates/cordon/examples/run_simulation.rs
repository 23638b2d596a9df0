//! Run agent-based simulation trials of one placement and watch the infected
//! count settle. Run with `cargo run --example run_simulation`.

use std::collections::BTreeSet;

use cordon::network::{generate, GeneratorConfig, Mobility};
use cordon::sim::{evaluate_placement, mix_seed, run_trial_observed, SimConfig};

fn main() {
    let scenario = generate(&GeneratorConfig {
        num_towns: 20,
        num_enemy: 3,
        num_units: 5,
        mobility: Mobility::Waypoint,
        seed: 5,
        ..GeneratorConfig::default()
    })
    .unwrap();
    let zones: BTreeSet<usize> = (0..scenario.network.num_towns())
        .filter(|t| !scenario.enemy_towns.contains(t))
        .take(3)
        .collect();
    println!(
        "strongholds {:?}, zones {zones:?}, {} units, waypoint mobility",
        scenario.enemy_towns, scenario.num_units
    );

    let mut config = SimConfig::default();
    config.steps = 5_000;

    // One observed trial: sample the infected count as the day goes on.
    let mut curve = Vec::new();
    let outcome = run_trial_observed(
        &scenario,
        &zones,
        &config,
        mix_seed(99, 0),
        &mut |tick, units| {
            if tick % 1000 == 0 {
                curve.push((tick, units.iter().filter(|u| u.infected).count()));
            }
        },
    )
    .unwrap();
    println!("\none trial, infected units over time:");
    for (tick, infected) in curve {
        println!(
            "  t = {:>6.0} s: {infected}/{} infected",
            tick as f64 * config.tick_s,
            outcome.num_units
        );
    }

    // Twenty independent trials for the actual estimate.
    let summary = evaluate_placement(&scenario, &zones, &config, 99, 20).unwrap();
    println!(
        "\n20 trials: mean infected fraction {:.3} (std {:.3})",
        summary.mean, summary.std
    );

    let bare = evaluate_placement(&scenario, &BTreeSet::new(), &config, 99, 20).unwrap();
    println!(
        "same seeds with no zones at all: {:.3} (std {:.3})",
        bare.mean, bare.std
    );
}
