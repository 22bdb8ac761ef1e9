//! Domain values shared by the grid, contract, oracle and simulator.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("negative timestamp {0}")]
    NegativeTime(f64),
    #[error("robot {robot} out of range for {n} robots")]
    RobotOutOfRange { robot: u32, n: u32 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Robot identity, an index in `[0, n)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl RobotId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "robot {}", self.0)
    }
}

/// Seconds on the simulation clock.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub f64);

impl Timestamp {
    pub fn new(t: f64) -> Result<Self, ValidationError> {
        let ts = Timestamp(t);
        ts.validate()?;
        Ok(ts)
    }

    pub fn secs(self) -> f64 {
        self.0
    }

    pub fn validate(self) -> Result<(), ValidationError> {
        if !self.0.is_finite() {
            return Err(ValidationError::NonFinite("timestamp"));
        }
        if self.0 < 0.0 {
            return Err(ValidationError::NegativeTime(self.0));
        }
        Ok(())
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut r = (theta + PI).rem_euclid(TAU);
    if r >= TAU {
        r = 0.0;
    }
    let out = r - PI;
    if out >= PI {
        -PI
    } else {
        out
    }
}

/// Planar position (meters) and heading (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    /// Builds a pose with the heading normalized into `[-π, π)`.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()) {
            return Err(ValidationError::NonFinite("pose"));
        }
        Ok(())
    }
}

pub const DIGEST_LEN: usize = 32;

/// Content digest of a captured image.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ImageDigest(#[serde(with = "hex_bytes")] pub [u8; DIGEST_LEN]);

impl ImageDigest {
    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        <[u8; DIGEST_LEN]>::try_from(bytes).ok().map(ImageDigest)
    }

    /// SHA-256 of arbitrary image bytes.
    pub fn of_bytes(bytes: &[u8]) -> Self {
        use sha2::{Digest, Sha256};
        ImageDigest(Sha256::digest(bytes).into())
    }

    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for ImageDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ImageDigest({}..)", &self.to_hex()[..12])
    }
}

mod hex_bytes {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let text = String::deserialize(d)?;
        let raw = hex::decode(text).map_err(D::Error::custom)?;
        <[u8; 32]>::try_from(raw.as_slice()).map_err(|_| D::Error::custom("expected 32 bytes"))
    }
}

/// A submitted image digest bound to the robot, pose and capture time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub robot: RobotId,
    pub digest: ImageDigest,
    pub pose: Pose,
    pub time: Timestamp,
}

impl PairRecord {
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.pose.validate()?;
        self.time.validate()
    }
}

/// Parameters of the detection contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractConfig {
    /// Number of byzantine robots tolerated.
    pub f: u32,
    /// Number of robots.
    pub n: u32,
    /// Intersection distance bound, meters.
    pub d: f64,
    /// Intersection heading bound, radians.
    pub delta: f64,
    /// Threshold multiplier over the mean score.
    pub m: f64,
    /// Completed comparison sets required before anyone can be flagged.
    #[serde(default = "one")]
    pub min_completed_sets: u64,
}

fn one() -> u64 {
    1
}

impl ContractConfig {
    /// Multiplier stated in prose ("30 percent bigger").
    pub const M_TEXT: f64 = 1.3;
    /// Multiplier consistent with every plotted threshold point.
    pub const M_FIGURE: f64 = 1.33;

    /// `f = 1`, `n = 4`, `d = 0.5 m`, `δ = 0.4 rad`, `m = 1.3`.
    pub fn reference() -> Self {
        ContractConfig {
            f: 1,
            n: 4,
            d: 0.5,
            delta: 0.4,
            m: Self::M_TEXT,
            min_completed_sets: 1,
        }
    }

    /// Members per intersection set, `3f + 1`.
    pub fn set_size(&self) -> usize {
        3 * self.f as usize + 1
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let bad = |msg: String| Err(ValidationError::Config(msg));
        if self.f == 0 {
            return bad("f must be positive".into());
        }
        if (self.n as u64) < 3 * self.f as u64 + 1 {
            return bad(format!("n = {} is below 3f+1 = {}", self.n, 3 * self.f + 1));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return bad(format!("d must be positive, got {}", self.d));
        }
        if !(self.delta > 0.0 && self.delta < PI) {
            return bad(format!("delta must lie in (0, π), got {}", self.delta));
        }
        if !(self.m.is_finite() && self.m > 1.0) {
            return bad(format!("m must exceed 1, got {}", self.m));
        }
        if self.min_completed_sets == 0 {
            return bad("min_completed_sets must be at least 1".into());
        }
        Ok(())
    }

    pub fn check_robot(&self, robot: RobotId) -> Result<(), ValidationError> {
        if robot.0 >= self.n {
            return Err(ValidationError::RobotOutOfRange {
                robot: robot.0,
                n: self.n,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_stays_half_open() {
        assert_eq!(normalize_angle(PI), -PI);
        assert_eq!(normalize_angle(-PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        for k in -50..50 {
            let a = normalize_angle(k as f64 * 0.77);
            assert!((-PI..PI).contains(&a));
        }
    }

    #[test]
    fn config_bounds() {
        assert!(ContractConfig::reference().validate().is_ok());
        let mut c = ContractConfig::reference();
        c.n = 3;
        assert!(c.validate().is_err());
        c = ContractConfig { f: 2, n: 7, ..ContractConfig::reference() };
        assert!(c.validate().is_ok());
        c.delta = PI;
        assert!(c.validate().is_err());
        c.delta = 0.4;
        c.m = 1.0;
        assert!(c.validate().is_err());
        c.m = 1.3;
        c.d = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_hex_serde() {
        let d = ImageDigest::of_bytes(b"frame");
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json.len(), 66);
        assert_eq!(serde_json::from_str::<ImageDigest>(&json).unwrap(), d);
        assert!(ImageDigest::from_slice(&[0u8; 31]).is_none());
    }

    #[test]
    fn timestamps_reject_bad_values() {
        assert!(Timestamp::new(-0.1).is_err());
        assert!(Timestamp::new(f64::NAN).is_err());
        assert!(Timestamp::new(0.0).is_ok());
    }
}
