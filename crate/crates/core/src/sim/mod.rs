//! Multi-robot experiments: trajectories, pose/image streams, the scene the
//! cameras see, honest and byzantine robots, and the event loop that drives
//! them through the ledger.

pub mod agent;
pub mod config;
pub mod runner;
pub mod scene;
pub mod sync;
pub mod trajectory;

use thiserror::Error;

pub use agent::{AgentBehavior, AlterationPolicy, RobotAgent};
pub use config::{OracleSpec, RobotSpec, SimConfig, StreamRates};
pub use runner::run_experiment;
pub use scene::{SceneChange, SceneModel};
pub use sync::associate_pose;
pub use trajectory::TrajectoryPlan;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error("time {t} is before the trajectory starts at {start}")]
    BeforeStart { t: f64, start: f64 },
    #[error("no pose within the staleness bound of image at {t} (nearest gap {gap})")]
    StalePose { t: f64, gap: f64 },
    #[error("ledger rejected transaction: {0}")]
    Ledger(#[from] crate::ledger::LedgerError),
    #[error("replica {node} diverged at seq {seq}")]
    Divergence { node: u32, seq: u64 },
}
