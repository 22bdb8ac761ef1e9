//! Vision-based byzantine robot detection on a replicated contract.
//!
//! Robots publish image digests tagged with the pose they were captured at.
//! The [`contract`] groups digests taken from nearly the same viewpoint by
//! `3f + 1` distinct robots into intersection sets, a trusted processing
//! cloud ([`oracle`]) compares every pair of images in a set, and robots
//! that collect too many disagreements are flagged.
//!
//! The [`ledger`] orders every contract call and replays it onto replicas,
//! and [`sim`] drives whole multi-robot runs from a configuration file.
//! Runnable walkthroughs live in `examples/`.

pub mod cli;
pub mod contract;
pub mod geometry;
pub mod grid;
pub mod ledger;
pub mod oracle;
pub mod report;
pub mod sim;
pub mod types;

pub use contract::{Caller, CompResult, ContractError, ContractState};
pub use grid::{IntersectionSet, SpatialGrid};
pub use types::{ContractConfig, ImageDigest, PairRecord, Pose, RobotId, Timestamp};
