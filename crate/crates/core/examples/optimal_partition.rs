//! Find the load-minimizing three-group partition for one configuration and
//! cross-check it against a short simulation.
//!
//! ```text
//! cargo run --release --example optimal_partition
//! ```

use hybridcache::model::{zipf_popularity, SystemConfig};
use hybridcache::optimizer::{optimize_hybrid, optimize_pure_coded, optimize_pure_uncoded};
use hybridcache::simulator::simulate;

fn main() {
    let config = SystemConfig::uniform(10, 1000, 100, 10, 1.0).unwrap();
    let pop = zipf_popularity(1000, 1.0, 10).unwrap();

    let hybrid = optimize_hybrid(&config, &pop).unwrap();
    let placement = hybrid.hybrid_placement().unwrap();
    println!(
        "hybrid optimum: M1={} N1={}  r1={:.4} r2={:.4} r={:.4}  ({} candidates)",
        placement.m1, placement.n1, hybrid.report.r1, hybrid.report.r2, hybrid.report.r,
        hybrid.candidates
    );

    let coded = optimize_pure_coded(&config, &pop).unwrap();
    let uncoded = optimize_pure_uncoded(&config, &pop).unwrap();
    println!("pure coded:    r={:.4}", coded.report.r);
    println!("pure uncoded:  r={:.4}", uncoded.report.r);

    let sim = simulate(&config, &pop, &hybrid.placement, 2000, 1).unwrap();
    println!("simulated at the optimum: r={:.4} +/- {:.4} (2000 slots)", sim.mean_r, sim.se_r);
}
