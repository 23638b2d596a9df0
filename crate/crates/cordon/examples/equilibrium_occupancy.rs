//! Solve the mean-field equilibrium: first where units spend their time
//! (baseline), then how that mass splits into clean and infected parts once
//! strongholds and a remediation zone enter the picture. Run with
//! `cargo run --example equilibrium_occupancy`.

use std::collections::BTreeSet;

use cordon::equilibrium::{
    baseline_equilibrium, dual_equilibrium_linearized, nonlinear_fixed_point, MarkovParams,
};
use cordon::network::{generate, GeneratorConfig};

fn main() {
    let scenario = generate(&GeneratorConfig {
        num_towns: 8,
        num_enemy: 1,
        num_units: 4,
        seed: 11,
        ..GeneratorConfig::default()
    })
    .unwrap();
    let net = &scenario.network;
    let params = MarkovParams::from_scenario(&scenario);

    let baseline = baseline_equilibrium(net, &params).unwrap();
    println!("baseline occupancy (where a unit is in the long run):");
    for t in 0..net.num_towns() {
        println!("  town {t}: {:.4}", baseline.town[t]);
    }
    let on_roads: f64 = baseline.road.values().sum();
    println!("  total mass on roads: {on_roads:.4}\n");

    let enemy = scenario.enemy_towns.clone();
    let zone: BTreeSet<usize> = (0..net.num_towns())
        .find(|t| !enemy.contains(t))
        .into_iter()
        .collect();
    println!("strongholds {enemy:?}, remediation zone {zone:?}\n");

    let lin = dual_equilibrium_linearized(net, &params, &enemy, &zone).unwrap();
    let fix = nonlinear_fixed_point(net, &params, &enemy, &zone).unwrap();

    println!("town   clean(lin)  infected(lin)  infected(fixed point)");
    for t in 0..net.num_towns() {
        println!(
            "  {t:>2}   {:>9.4}   {:>12.4}   {:>20.4}",
            lin.town_clean[t], lin.town_infected[t], fix.town_infected[t]
        );
    }
    println!(
        "\ntotal infected fraction: linearized {:.4}, fixed point {:.4}",
        lin.infected_fraction(),
        fix.infected_fraction()
    );
    println!("(the linearization is the fast screen; it usually over-estimates)");
}
