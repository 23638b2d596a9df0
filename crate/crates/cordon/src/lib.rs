//! Where should you put the checkpoints?
//!
//! `cordon` models a road network of towns patrolled by a small force of
//! mobile units. Some towns host enemy strongholds that infect the radios of
//! units passing through; units also infect each other when they meet on
//! roads or share a town. The defender gets a budget of `k` remediation
//! zones — towns where a unit's software is wiped clean on entry — and wants
//! to place them so that, in the long run, as few units as possible are
//! carrying malware.
//!
//! The crate provides three interchangeable ways to score a placement and
//! several ways to search for one:
//!
//! * [`centrality`] — graph-theoretic stand-ins (PageRank, betweenness),
//!   either top-k or iterated with vertex deletion,
//! * [`equilibrium`] — a mean-field Markov model of unit movement and
//!   infection, solved for its stationary distribution,
//! * [`sim`] — a tick-driven agent-based simulation of the actual units,
//! * [`placement`] — exhaustive, random-sampling, and Monte Carlo greedy
//!   searches over candidate zone sets driven by either evaluator,
//! * [`harness`] — the experiment grid that pits every method against every
//!   infection/remediation budget and writes a CSV of the results.
//!
//! The fastest way to get a feel for the crate is the `examples/` directory;
//! each file is a small end-to-end program:
//!
//! ```text
//! cargo run --example generate_network     # build and save a random scenario
//! cargo run --example centrality_ranking   # PageRank / betweenness selection
//! cargo run --example equilibrium_occupancy# stationary occupancies, clean vs infected
//! cargo run --example run_simulation       # agent-based trials on one placement
//! cargo run --example search_placement     # exhaustive vs sampling vs greedy search
//! cargo run --example chokepoint_vs_hub    # where centrality picks the wrong town
//! cargo run --example experiment_grid      # a miniature method-comparison table
//! ```
//!
//! A thin CLI wraps the same entry points (`cordon generate | select |
//! evaluate | experiment`); see the README for flags and file formats.

pub mod centrality;
pub mod equilibrium;
pub mod harness;
pub mod network;
pub mod placement;
pub mod sim;

pub use network::{RoadNetwork, Scenario};
