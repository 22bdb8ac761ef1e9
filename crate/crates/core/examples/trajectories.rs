//! Waypoint trajectories and matching 1 Hz images to the 120 Hz pose stream.
//!
//! ```text
//! cargo run --example trajectories
//! ```

use byzvision::sim::sync::{associate_pose, sample_stream, sample_times, DEFAULT_STALENESS};
use byzvision::sim::TrajectoryPlan;
use byzvision::Timestamp;

fn main() {
    let plan = TrajectoryPlan::new(&[[1.0, 1.0], [3.0, 1.0], [3.0, 2.0]], 0.5, Timestamp(2.0)).unwrap();
    println!("length {} m, ends at t={}", plan.length(), plan.end_time().0);

    let poses = sample_stream(plan.start_time(), plan.end_time(), 120.0, |t| plan.pose_at(t)).unwrap();
    println!("{} pose samples", poses.len());

    for t in sample_times(plan.start_time(), Timestamp(9.0), 1.0) {
        match associate_pose(t, &poses, DEFAULT_STALENESS) {
            Ok(p) => println!("image t={:>4.1}  pose ({:.3}, {:.3}) heading {:+.3}", t.0, p.x, p.y, p.theta),
            Err(e) => println!("image t={:>4.1}  dropped: {e}", t.0),
        }
    }
    // After the plan ends the robot stays put and the stream stops.
    println!("late image: {:?}", associate_pose(Timestamp(12.0), &poses, DEFAULT_STALENESS).unwrap_err());
}
