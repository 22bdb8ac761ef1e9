//! Piecewise-linear waypoint trajectories at constant speed.

use crate::geometry::euclidean_distance;
use crate::types::{Pose, Timestamp};

use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan {
    /// Heading of each waypoint is the direction of the segment leaving it;
    /// the last one keeps the final segment's heading.
    waypoints: Vec<Pose>,
    speed: f64,
    start_time: Timestamp,
    /// Cumulative path length at each waypoint.
    arc: Vec<f64>,
}

impl TrajectoryPlan {
    pub fn new(points: &[[f64; 2]], speed: f64, start_time: Timestamp) -> Result<Self, SimError> {
        if points.len() < 2 {
            return Err(SimError::Config("a trajectory needs at least 2 waypoints".into()));
        }
        if !(speed.is_finite() && speed > 0.0) {
            return Err(SimError::Config(format!("speed must be positive, got {speed}")));
        }
        start_time
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SimError::Config("non-finite waypoint".into()));
        }

        let headings: Vec<Option<f64>> = points
            .windows(2)
            .map(|w| {
                let (dx, dy) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
                (dx != 0.0 || dy != 0.0).then(|| dy.atan2(dx))
            })
            .collect();
        let Some(mut last) = headings.iter().rev().flatten().next().copied() else {
            return Err(SimError::Config("trajectory has zero length".into()));
        };
        // Zero-length segments borrow the heading of the next real one.
        let mut resolved = vec![0.0; points.len()];
        resolved[points.len() - 1] = last;
        for k in (0..headings.len()).rev() {
            if let Some(h) = headings[k] {
                last = h;
            }
            resolved[k] = last;
        }
        let waypoints: Vec<Pose> = points
            .iter()
            .zip(&resolved)
            .map(|(p, &h)| Pose::new(p[0], p[1], h))
            .collect();
        let mut arc = Vec::with_capacity(waypoints.len());
        let mut total = 0.0;
        arc.push(0.0);
        for w in waypoints.windows(2) {
            total += euclidean_distance(&w[0], &w[1]);
            arc.push(total);
        }
        Ok(TrajectoryPlan {
            waypoints,
            speed,
            start_time,
            arc,
        })
    }

    pub fn waypoints(&self) -> &[Pose] {
        &self.waypoints
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn start_time(&self) -> Timestamp {
        self.start_time
    }

    pub fn length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    pub fn end_time(&self) -> Timestamp {
        Timestamp(self.start_time.0 + self.length() / self.speed)
    }

    /// Pose at time `t`, clamped to the last waypoint after the path ends.
    pub fn pose_at(&self, t: Timestamp) -> Result<Pose, SimError> {
        if !(t.0 >= self.start_time.0) {
            return Err(SimError::BeforeStart {
                t: t.0,
                start: self.start_time.0,
            });
        }
        let s = (t.0 - self.start_time.0) * self.speed;
        if s >= self.length() {
            return Ok(*self.waypoints.last().unwrap());
        }
        // First segment whose end lies beyond s.
        let seg = self.arc.partition_point(|&a| a <= s) - 1;
        let (a, b) = (&self.waypoints[seg], &self.waypoints[seg + 1]);
        let span = self.arc[seg + 1] - self.arc[seg];
        let u = (s - self.arc[seg]) / span;
        Ok(Pose::new(
            a.x + u * (b.x - a.x),
            a.y + u * (b.y - a.y),
            a.theta,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn plan(points: &[[f64; 2]]) -> TrajectoryPlan {
        TrajectoryPlan::new(points, 1.0, Timestamp(10.0)).unwrap()
    }

    #[test]
    fn starts_at_first_waypoint() {
        let p = plan(&[[1.0, 1.0], [3.0, 1.0]]);
        assert_eq!(p.pose_at(Timestamp(10.0)).unwrap(), Pose::new(1.0, 1.0, 0.0));
    }

    #[test]
    fn midpoint_of_segment() {
        let p = plan(&[[0.0, 0.0], [0.0, 2.0]]);
        let mid = p.pose_at(Timestamp(11.0)).unwrap();
        assert!((mid.x - 0.0).abs() < 1e-12 && (mid.y - 1.0).abs() < 1e-12);
        assert!((mid.theta - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn clamps_after_the_end() {
        let p = plan(&[[0.0, 0.0], [1.0, 0.0], [1.0, -1.0]]);
        assert_eq!(p.end_time(), Timestamp(12.0));
        let end = p.pose_at(Timestamp(100.0)).unwrap();
        assert_eq!((end.x, end.y), (1.0, -1.0));
        assert!((end.theta + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn turns_at_corners() {
        let p = plan(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let corner = p.pose_at(Timestamp(11.0)).unwrap();
        assert_eq!((corner.x, corner.y), (1.0, 0.0));
        assert!((corner.theta - FRAC_PI_2).abs() < 1e-12);
        let before = p.pose_at(Timestamp(10.999)).unwrap();
        assert_eq!(before.theta, 0.0);
    }

    #[test]
    fn rejects_bad_plans_and_times() {
        assert!(TrajectoryPlan::new(&[[0.0, 0.0]], 1.0, Timestamp(0.0)).is_err());
        assert!(TrajectoryPlan::new(&[[0.0, 0.0], [1.0, 0.0]], 0.0, Timestamp(0.0)).is_err());
        assert!(TrajectoryPlan::new(&[[0.0, 0.0], [0.0, 0.0]], 1.0, Timestamp(0.0)).is_err());
        let p = plan(&[[0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(
            p.pose_at(Timestamp(9.0)),
            Err(SimError::BeforeStart { .. })
        ));
    }

    #[test]
    fn repeated_waypoints_take_next_heading() {
        let p = plan(&[[0.0, 0.0], [0.0, 0.0], [0.0, 1.0]]);
        assert!((p.waypoints()[0].theta - FRAC_PI_2).abs() < 1e-12);
        let q = p.pose_at(Timestamp(10.5)).unwrap();
        assert!((q.y - 0.5).abs() < 1e-12);
    }
}
