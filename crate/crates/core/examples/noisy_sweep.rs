//! Detection rates over many seeds with a noisy comparison module, for
//! several settings of the minimum number of completed sets before anyone
//! can be flagged.
//!
//! ```text
//! cargo run --release --example noisy_sweep [seeds]
//! ```

use std::path::Path;

use byzvision::sim::{run_experiment, SimConfig};

fn main() {
    let seeds: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("seed count"))
        .unwrap_or(200);
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/noisy.toml");
    let mut cfg = SimConfig::load(&path).unwrap();
    cfg.verify_replicas = false;

    println!("gate  byzantine flagged  no honest flag");
    for gate in 1..=5 {
        cfg.contract.min_completed_sets = gate;
        let (mut caught, mut clean) = (0, 0);
        for seed in 0..seeds {
            cfg.seed = seed;
            let s = run_experiment(&cfg).unwrap().summary;
            caught += s.flags[0] as u64;
            clean += s.flags[1..].iter().all(|f| !f) as u64;
        }
        let pct = |k: u64| 100.0 * k as f64 / seeds as f64;
        println!("{gate:>4}  {:>16.1}%  {:>13.1}%", pct(caught), pct(clean));
    }
}
