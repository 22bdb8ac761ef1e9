#![allow(dead_code)]

pub mod grid;

use std::path::PathBuf;

use byzvision::contract::ContractState;
use byzvision::sim::SimConfig;
use byzvision::{Caller, CompResult, ContractConfig, ImageDigest, PairRecord, Pose, RobotId, Timestamp};

pub fn pair(robot: u32, tag: u64, x: f64, y: f64, theta: f64, t: f64) -> PairRecord {
    let mut bytes = robot.to_le_bytes().to_vec();
    bytes.extend_from_slice(&tag.to_le_bytes());
    PairRecord {
        robot: RobotId(robot),
        digest: ImageDigest::of_bytes(&bytes),
        pose: Pose::new(x, y, theta),
        time: Timestamp(t),
    }
}

/// Config with `min_completed_sets = 1` and the given multiplier.
pub fn config(m: f64) -> ContractConfig {
    ContractConfig {
        m,
        ..ContractConfig::reference()
    }
}

/// Submits one co-located pair per robot and returns the published set id.
pub fn publish_set(state: &mut ContractState, round: u64) -> u64 {
    let n = state.config().n;
    // Each round sits in its own patch of the plane, far from the others.
    let x = 10.0 * round as f64;
    let mut published = Vec::new();
    for r in 0..n {
        let p = pair(r, round, x + 0.01 * r as f64, 0.2, 0.1, round as f64);
        published.extend(state.submit_pair(Caller::Robot(p.robot), p).unwrap());
    }
    assert_eq!(published.len(), 1, "round {round} should publish exactly one set");
    published[0].set_id
}

/// Fills every edge of a set, marking the edges `red` says are anomalous.
pub fn complete_set(state: &mut ContractState, set_id: u64, red: impl Fn(u32, u32) -> bool) {
    let robots: Vec<u32> = state.intersections()[set_id as usize]
        .robots()
        .map(|r| r.0)
        .collect();
    for (i, &a) in robots.iter().enumerate() {
        for &b in &robots[i + 1..] {
            let res = CompResult {
                set_id,
                robot_a: RobotId(a),
                robot_b: RobotId(b),
                anomaly: red(a, b),
            };
            state.submit_comparison(Caller::Cloud, res).unwrap();
        }
    }
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
}

pub fn fixture(name: &str) -> SimConfig {
    SimConfig::load(&fixture_path(name)).unwrap()
}
