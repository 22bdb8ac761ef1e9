//! Planar predicates deciding whether two images could overlap.

use std::f64::consts::TAU;

use crate::types::{PairRecord, Pose};

/// Straight-line distance between two pose positions.
pub fn euclidean_distance(a: &Pose, b: &Pose) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    (dx * dx + dy * dy).sqrt()
}

/// Smallest rotation between two headings, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let r = (a - b).abs().rem_euclid(TAU);
    r.min(TAU - r)
}

/// Both bounds are inclusive.
pub fn pair_compatible(a: &PairRecord, b: &PairRecord, d: f64, delta: f64) -> bool {
    poses_compatible(&a.pose, &b.pose, d, delta)
}

pub fn poses_compatible(a: &Pose, b: &Pose, d: f64, delta: f64) -> bool {
    euclidean_distance(a, b) <= d && angular_distance(a.theta, b.theta) <= delta
}
