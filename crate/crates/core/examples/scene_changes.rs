//! A genuine change in the environment looks like disagreement too. An
//! object appears on the left corridor between robot visits, and honest
//! robots that saw it disagree with those that passed earlier.
//!
//! ```text
//! cargo run --example scene_changes
//! ```

use std::path::Path;

use byzvision::sim::{run_experiment, SceneChange, SimConfig};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/no-byzantine.toml");
    let mut cfg = SimConfig::load(&path).unwrap();

    let before = run_experiment(&cfg).unwrap().summary;
    println!("static scene:  scores {:?}", before.final_scores);

    cfg.scene.changes.push(SceneChange {
        time: 50.0,
        x: 1.0,
        y: 2.5,
        radius: 0.4,
    });
    let report = run_experiment(&cfg).unwrap();
    println!("after change:  scores {:?}", report.summary.final_scores);
    for set in report.intersections.iter().filter(|s| (s.y - 2.5).abs() < 0.6 && s.x < 1.5) {
        println!("  set {} at ({:.2}, {:.2}) formed at t={}", set.set_id, set.x, set.y, set.time);
    }
    println!("flags {:?}", report.summary.flags);
}
