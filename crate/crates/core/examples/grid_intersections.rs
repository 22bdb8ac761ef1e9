//! How the spatial grid groups co-located images into intersection sets.
//!
//! ```text
//! cargo run --example grid_intersections
//! ```

use byzvision::grid::cells_for_position;
use byzvision::{ImageDigest, PairRecord, Pose, RobotId, SpatialGrid, Timestamp};

fn record(robot: u32, x: f64, y: f64, theta: f64, t: f64) -> PairRecord {
    PairRecord {
        robot: RobotId(robot),
        digest: ImageDigest::of_bytes(format!("{robot}@{t}").as_bytes()),
        pose: Pose::new(x, y, theta),
        time: Timestamp(t),
    }
}

fn main() {
    let d = 0.5;
    let delta = 0.4;
    let (x, y) = (1.3, 0.7);
    println!("({x}, {y}) falls in cells {:?}", cells_for_position(x, y, d).unwrap());

    let mut grid = SpatialGrid::new(d);
    let records = [
        record(0, 1.20, 0.70, 0.00, 1.0),
        record(1, 1.35, 0.80, 0.10, 2.0),
        // Facing the other way: never compatible with the rest.
        record(2, 1.30, 0.75, 3.00, 3.0),
        record(2, 1.40, 0.60, -0.10, 4.0),
        // Too far from robot 0.
        record(3, 1.90, 0.70, 0.05, 5.0),
        record(3, 1.50, 0.90, 0.05, 6.0),
    ];
    for r in records {
        grid.insert(r).unwrap();
        let found = grid.find_intersections(1, delta);
        println!(
            "t={} robot {} at ({:.2}, {:.2}) -> {} new set(s)",
            r.time.0,
            r.robot.0,
            r.pose.x,
            r.pose.y,
            found.len()
        );
        for set in found {
            let members: Vec<String> = set
                .members
                .iter()
                .map(|m| format!("robot {} t={}", m.robot.0, m.time.0))
                .collect();
            println!("  set {} from cell {:?}: {}", set.set_id, set.origin_cell, members.join(", "));
        }
    }
    println!("consumed digests: {}", grid.consumed_digests().count());
}
