//! Generate a random connected scenario, save it, load it back, and print a
//! short summary of the map. Run with `cargo run --example generate_network`.

use cordon::network::{generate, load_scenario_str, save_scenario, GeneratorConfig};

fn main() {
    let config = GeneratorConfig {
        num_towns: 20,
        num_enemy: 3,
        budget: 3,
        seed: 42,
        ..GeneratorConfig::default()
    };
    let scenario = generate(&config).expect("generation cannot fail on these knobs");

    let net = &scenario.network;
    println!(
        "generated {} towns and {} roads (seed {})",
        net.num_towns(),
        net.num_roads(),
        scenario.seed
    );
    println!("enemy strongholds: {:?}", scenario.enemy_towns);

    let degrees: Vec<usize> = (0..net.num_towns()).map(|t| net.degree(t)).collect();
    let mean_degree = degrees.iter().sum::<usize>() as f64 / degrees.len() as f64;
    println!(
        "degrees: min {}, mean {:.2}, max {}",
        degrees.iter().min().unwrap(),
        mean_degree,
        degrees.iter().max().unwrap()
    );

    let longest = (0..net.num_roads())
        .map(|r| net.road(r).length)
        .fold(0.0f64, f64::max);
    println!("longest road: {:.0} m", longest);

    // The JSON round trip is exact: every field survives save -> load.
    let text = save_scenario(&scenario);
    let reloaded = load_scenario_str(&text).expect("own output must parse");
    assert_eq!(reloaded, scenario);
    println!("\nscenario JSON round-trips exactly ({} bytes):", text.len());
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    println!("  ...");
}
