use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::oracle::SceneToken;
use crate::types::{ImageDigest, Pose, RobotId, Timestamp};

use super::SimError;

/// When a byzantine robot tampers with what it submits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlterationPolicy {
    Always,
    Probability { p: f64 },
    /// Only inside the axis-aligned box `[min, max]`.
    Region { min: [f64; 2], max: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentBehavior {
    #[default]
    Honest,
    Byzantine(AlterationPolicy),
}

impl AgentBehavior {
    pub fn is_byzantine(&self) -> bool {
        matches!(self, AgentBehavior::Byzantine(_))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        match self {
            AgentBehavior::Byzantine(AlterationPolicy::Probability { p })
                if !(0.0..=1.0).contains(p) =>
            {
                Err(SimError::Config(format!("alteration probability {p} outside [0, 1]")))
            }
            AgentBehavior::Byzantine(AlterationPolicy::Region { min, max })
                if !(min[0] <= max[0] && min[1] <= max[1]) =>
            {
                Err(SimError::Config("alteration region has min above max".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A captured frame, before submission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capture {
    pub digest: ImageDigest,
    pub token: SceneToken,
    pub pose: Pose,
    pub time: Timestamp,
    pub altered: bool,
}

/// One robot's camera and submission behavior.
#[derive(Debug, Clone)]
pub struct RobotAgent {
    pub id: RobotId,
    pub behavior: AgentBehavior,
    rng: ChaCha8Rng,
}

impl RobotAgent {
    pub fn new(id: RobotId, behavior: AgentBehavior, run_seed: u64) -> Self {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&run_seed.to_le_bytes());
        seed[8..12].copy_from_slice(&id.0.to_le_bytes());
        seed[12..16].copy_from_slice(b"bhvr");
        RobotAgent {
            id,
            behavior,
            rng: ChaCha8Rng::from_seed(seed),
        }
    }

    fn tampers(&mut self, pose: &Pose) -> bool {
        match self.behavior {
            AgentBehavior::Honest => false,
            AgentBehavior::Byzantine(AlterationPolicy::Always) => true,
            AgentBehavior::Byzantine(AlterationPolicy::Probability { p }) => self.rng.gen_bool(p),
            AgentBehavior::Byzantine(AlterationPolicy::Region { min, max }) => {
                (min[0]..=max[0]).contains(&pose.x) && (min[1]..=max[1]).contains(&pose.y)
            }
        }
    }

    /// Takes a frame of the true scene and applies this robot's behavior.
    pub fn capture(&mut self, pose: Pose, time: Timestamp, truth: SceneToken) -> Capture {
        let altered = self.tampers(&pose);
        let token = if altered {
            SceneToken::derive(&[
                b"forged",
                &truth.0.to_le_bytes(),
                &self.id.0.to_le_bytes(),
                &time.0.to_bits().to_le_bytes(),
            ])
        } else {
            truth
        };
        // The frame bytes: who took it, when, where, and what it shows.
        let mut frame = Vec::with_capacity(44);
        frame.extend_from_slice(&self.id.0.to_le_bytes());
        frame.extend_from_slice(&time.0.to_bits().to_le_bytes());
        for v in [pose.x, pose.y, pose.theta] {
            frame.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        frame.extend_from_slice(&token.0.to_le_bytes());
        Capture {
            digest: ImageDigest::of_bytes(&frame),
            token,
            pose,
            time,
            altered,
        }
    }
}
