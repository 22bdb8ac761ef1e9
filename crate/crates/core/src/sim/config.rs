//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::types::{ContractConfig, Timestamp};

use super::agent::AgentBehavior;
use super::scene::SceneModel;
use super::sync::DEFAULT_STALENESS;
use super::trajectory::TrajectoryPlan;
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamRates {
    #[serde(default = "default_pose_hz")]
    pub pose_hz: f64,
    #[serde(default = "default_image_hz")]
    pub image_hz: f64,
    /// Largest accepted gap between an image and its pose, seconds.
    #[serde(default = "default_staleness")]
    pub staleness: f64,
}

fn default_pose_hz() -> f64 {
    120.0
}

fn default_image_hz() -> f64 {
    1.0
}

fn default_staleness() -> f64 {
    DEFAULT_STALENESS
}

fn default_true() -> bool {
    true
}

impl Default for StreamRates {
    fn default() -> Self {
        StreamRates {
            pose_hz: default_pose_hz(),
            image_hz: default_image_hz(),
            staleness: default_staleness(),
        }
    }
}

/// Comparison back-end. The noisy oracle's stream is seeded from the run
/// seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleSpec {
    #[default]
    Exact,
    Noisy { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub waypoints: Vec<[f64; 2]>,
    pub speed: f64,
    #[serde(default)]
    pub start_time: f64,
    #[serde(default)]
    pub behavior: AgentBehavior,
}

impl RobotSpec {
    pub fn plan(&self) -> Result<TrajectoryPlan, SimError> {
        TrajectoryPlan::new(&self.waypoints, self.speed, Timestamp(self.start_time))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    /// Simulated seconds.
    pub duration: f64,
    pub contract: ContractConfig,
    #[serde(default)]
    pub rates: StreamRates,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub scene: SceneModel,
    /// Compare every replica's state digest after each transaction.
    #[serde(default = "default_true")]
    pub verify_replicas: bool,
    pub robots: Vec<RobotSpec>,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        self.contract
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        if self.contract.n as usize != self.robots.len() {
            return bad(format!(
                "contract expects {} robots, {} configured",
                self.contract.n,
                self.robots.len()
            ));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        let r = &self.rates;
        if !(r.image_hz.is_finite() && r.image_hz > 0.0) {
            return bad("image_hz must be positive".into());
        }
        if !(r.pose_hz.is_finite() && r.pose_hz > r.image_hz) {
            return bad(format!(
                "pose_hz ({}) must exceed image_hz ({})",
                r.pose_hz, r.image_hz
            ));
        }
        if !(r.staleness.is_finite() && r.staleness >= 0.0) {
            return bad("staleness must be non-negative".into());
        }
        if let OracleSpec::Noisy { alpha, beta } = self.oracle {
            if !((0.0..1.0).contains(&alpha) && (0.0..1.0).contains(&beta)) {
                return bad(format!("noise rates must lie in [0, 1): {alpha}, {beta}"));
            }
        }
        self.scene.validate()?;
        for (k, robot) in self.robots.iter().enumerate() {
            robot
                .plan()
                .map_err(|e| SimError::Config(format!("robot {k}: {e}")))?;
            robot.behavior.validate()?;
            if let Some(p) = robot
                .waypoints
                .iter()
                .find(|p| !self.scene.contains(p[0], p[1]))
            {
                return bad(format!("robot {k}: waypoint {p:?} is outside the arena"));
            }
        }
        Ok(())
    }
}
