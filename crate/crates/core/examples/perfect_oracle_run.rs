//! A full simulated run with an exact comparison module and one robot that
//! alters every image. Prints the score timeline and where sets formed.
//!
//! ```text
//! cargo run --example perfect_oracle_run
//! ```

use std::path::Path;

use byzvision::sim::{run_experiment, SimConfig};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/perfect-oracle.toml");
    let cfg = SimConfig::load(&path).unwrap();
    let report = run_experiment(&cfg).unwrap();

    println!("{:>6}  {:>18}  {:>9}", "time", "scores", "threshold");
    for rows in report.timeline.chunks(cfg.robots.len()) {
        let scores: Vec<u64> = rows.iter().map(|r| r.score).collect();
        println!("{:>6.1}  {:>18}  {:>9.2}", rows[0].time, format!("{scores:?}"), rows[0].threshold);
    }
    println!();
    for set in &report.intersections {
        println!(
            "set {:>2} at ({:.2}, {:.2}) heading {:+.2}",
            set.set_id, set.x, set.y, set.heading
        );
    }
    println!();
    for v in &report.verdicts {
        println!("robot {}: flagged={} at {:?}", v.robot, v.flagged, v.flag_time);
    }
    println!("final digest {}", report.summary.final_digest);
}
