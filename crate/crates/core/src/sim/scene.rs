//! Ground truth the robots' cameras see.
//!
//! The static scene looks the same from every viewpoint, so honest robots
//! always agree. A [`SceneChange`] adds or removes an object from a given
//! time onwards; it is visible from poses within its radius, and robots
//! that see it disagree with robots that passed before it happened.

use serde::{Deserialize, Serialize};

use crate::oracle::SceneToken;
use crate::types::{Pose, Timestamp};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneChange {
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

fn default_arena_side() -> f64 {
    48f64.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneModel {
    /// The arena is `[0, side] × [0, side]`.
    #[serde(default = "default_arena_side")]
    pub arena_side: f64,
    #[serde(default)]
    pub changes: Vec<SceneChange>,
}

impl Default for SceneModel {
    fn default() -> Self {
        SceneModel {
            arena_side: default_arena_side(),
            changes: Vec::new(),
        }
    }
}

impl SceneModel {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.arena_side.is_finite() && self.arena_side > 0.0) {
            return Err(SimError::Config("arena side must be positive".into()));
        }
        for c in &self.changes {
            let finite = [c.time, c.x, c.y, c.radius].iter().all(|v| v.is_finite());
            if !finite || c.time < 0.0 || c.radius < 0.0 {
                return Err(SimError::Config(format!("bad scene change {c:?}")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.arena_side).contains(&x) && (0.0..=self.arena_side).contains(&y)
    }

    /// Number of changes that have happened by `t`.
    pub fn epoch_at(&self, t: Timestamp) -> usize {
        self.changes.iter().filter(|c| c.time <= t.0).count()
    }

    pub fn token_at(&self, pose: &Pose, t: Timestamp) -> SceneToken {
        let visible: Vec<u8> = self
            .changes
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                let (dx, dy) = (pose.x - c.x, pose.y - c.y);
                c.time <= t.0 && (dx * dx + dy * dy).sqrt() <= c.radius
            })
            .flat_map(|(k, _)| (k as u32).to_le_bytes())
            .collect();
        SceneToken::derive(&[b"scene", &visible])
    }
}
