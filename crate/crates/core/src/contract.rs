//! The replicated detection contract.
//!
//! Robots submit image digests with poses; the contract groups them into
//! intersection sets through the [`SpatialGrid`], the processing cloud
//! reports one verdict per member pair, and each red verdict adds one point
//! to both robots involved. A robot whose score rises above `m` times the
//! mean score is flagged, and flags never clear.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, IntersectionSet, SpatialGrid};
use crate::types::{ContractConfig, PairRecord, RobotId, ValidationError};

/// Who is calling into the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Caller {
    /// Deploys the contract.
    Operator,
    Robot(RobotId),
    /// The trusted processing cloud.
    Cloud,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractError {
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("{caller:?} may not {action}")]
    Unauthorized { caller: Caller, action: &'static str },
    #[error("duplicate submission: {0}")]
    Duplicate(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("cannot compute a threshold over no scores")]
    EmptyScores,
}

impl From<GridError> for ContractError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::DuplicateDigest(d) => ContractError::Duplicate(format!("digest {d}")),
            GridError::BadPosition => ContractError::Invalid(ValidationError::NonFinite("pose")),
            GridError::TooLarge { .. } => unreachable!("grid inserts never enumerate"),
        }
    }
}

/// Outcome of one pairwise image comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompResult {
    pub set_id: u64,
    pub robot_a: RobotId,
    pub robot_b: RobotId,
    /// True when the two images disagree.
    pub anomaly: bool,
}

impl CompResult {
    pub fn edge(&self) -> (RobotId, RobotId) {
        edge_key(self.robot_a, self.robot_b)
    }
}

fn edge_key(a: RobotId, b: RobotId) -> (RobotId, RobotId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Complete graph over a set's members; each edge holds the cloud's verdict
/// once it arrives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGraph {
    pub set_id: u64,
    pub vertices: Vec<RobotId>,
    edges: BTreeMap<(RobotId, RobotId), Option<bool>>,
}

impl ComparisonGraph {
    pub fn new(set: &IntersectionSet) -> Self {
        let vertices: Vec<RobotId> = set.robots().collect();
        let mut edges = BTreeMap::new();
        for (k, &a) in vertices.iter().enumerate() {
            for &b in &vertices[k + 1..] {
                edges.insert(edge_key(a, b), None);
            }
        }
        ComparisonGraph {
            set_id: set.set_id,
            vertices,
            edges,
        }
    }

    pub fn slots(&self) -> usize {
        self.edges.len()
    }

    pub fn filled(&self) -> usize {
        self.edges.values().filter(|v| v.is_some()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.values().all(Option::is_some)
    }

    pub fn edge(&self, a: RobotId, b: RobotId) -> Option<Option<bool>> {
        self.edges.get(&edge_key(a, b)).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((RobotId, RobotId), Option<bool>)> + '_ {
        self.edges.iter().map(|(k, v)| (*k, *v))
    }

    /// Edge slots with no verdict yet, in robot order.
    pub fn missing(&self) -> impl Iterator<Item = (RobotId, RobotId)> + '_ {
        self.edges
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(k, _)| *k)
    }

    /// Number of red edges touching `robot`.
    pub fn red_degree(&self, robot: RobotId) -> u64 {
        self.edges
            .iter()
            .filter(|((a, b), v)| **v == Some(true) && (*a == robot || *b == robot))
            .count() as u64
    }
}

/// Entries of the contract's append-only audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum AuditEvent {
    Initialized,
    PairAccepted { robot: RobotId, digest: String },
    SetPublished { set_id: u64 },
    ComparisonRecorded { set_id: u64, robot_a: RobotId, robot_b: RobotId, anomaly: bool },
    SetCompleted { set_id: u64 },
    RobotFlagged { robot: RobotId },
    Rejected { seq: u64, op: String, reason: String },
}

/// Returns `m × mean(scores)`.
pub fn compute_threshold(scores: &[u64], m: f64) -> Result<f64, ContractError> {
    if scores.is_empty() {
        return Err(ContractError::EmptyScores);
    }
    let total: u64 = scores.iter().sum();
    Ok(m * (total as f64 / scores.len() as f64))
}

/// Indices of robots scoring strictly above the threshold.
pub fn above_threshold(scores: &[u64], m: f64) -> Result<Vec<RobotId>, ContractError> {
    let threshold = compute_threshold(scores, m)?;
    Ok(scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s as f64 > threshold)
        .map(|(i, _)| RobotId(i as u32))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractState {
    config: ContractConfig,
    scores: Vec<u64>,
    byz_flags: Vec<bool>,
    grid: SpatialGrid,
    intersections: Vec<IntersectionSet>,
    graphs: BTreeMap<u64, ComparisonGraph>,
    completed_sets: u64,
    audit: Vec<AuditEvent>,
}

impl ContractState {
    pub fn init(config: ContractConfig) -> Result<Self, ContractError> {
        config.validate()?;
        let n = config.n as usize;
        Ok(ContractState {
            config,
            scores: vec![0; n],
            byz_flags: vec![false; n],
            grid: SpatialGrid::new(config.d),
            intersections: Vec::new(),
            graphs: BTreeMap::new(),
            completed_sets: 0,
            audit: vec![AuditEvent::Initialized],
        })
    }

    pub fn config(&self) -> &ContractConfig {
        &self.config
    }

    pub fn scores(&self) -> &[u64] {
        &self.scores
    }

    pub fn byz_flags(&self) -> &[bool] {
        &self.byz_flags
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn completed_sets(&self) -> u64 {
        self.completed_sets
    }

    pub fn audit(&self) -> &[AuditEvent] {
        &self.audit
    }

    /// Every set published so far, indexed by `set_id`.
    pub fn intersections(&self) -> &[IntersectionSet] {
        &self.intersections
    }

    pub fn graphs(&self) -> impl Iterator<Item = &ComparisonGraph> {
        self.graphs.values()
    }

    pub fn graph(&self, set_id: u64) -> Option<&ComparisonGraph> {
        self.graphs.get(&set_id)
    }

    pub fn threshold(&self) -> f64 {
        compute_threshold(&self.scores, self.config.m).expect("n >= 4")
    }

    pub fn submit_pair(
        &mut self,
        caller: Caller,
        pair: PairRecord,
    ) -> Result<Vec<IntersectionSet>, ContractError> {
        if caller != Caller::Robot(pair.robot) {
            return Err(ContractError::Unauthorized {
                caller,
                action: "submit pairs for another robot",
            });
        }
        self.config.check_robot(pair.robot)?;
        pair.validate()?;
        self.grid.insert(pair)?;
        self.audit.push(AuditEvent::PairAccepted {
            robot: pair.robot,
            digest: pair.digest.to_hex(),
        });
        let found = self.grid.find_intersections(self.config.f, self.config.delta);
        for set in &found {
            self.graphs.insert(set.set_id, ComparisonGraph::new(set));
            self.intersections.push(set.clone());
            self.audit.push(AuditEvent::SetPublished { set_id: set.set_id });
        }
        Ok(found)
    }

    /// Sets still waiting for at least one verdict. Polling does not consume.
    pub fn get_intersection(&self) -> Vec<&IntersectionSet> {
        self.graphs
            .values()
            .filter(|g| !g.is_complete())
            .map(|g| &self.intersections[g.set_id as usize])
            .collect()
    }

    /// Records one verdict. Returns true when it completed its set.
    pub fn submit_comparison(
        &mut self,
        caller: Caller,
        res: CompResult,
    ) -> Result<bool, ContractError> {
        if caller != Caller::Cloud {
            return Err(ContractError::Unauthorized {
                caller,
                action: "submit comparisons",
            });
        }
        if res.robot_a == res.robot_b {
            return Err(ContractError::Duplicate(format!(
                "self-comparison of {}",
                res.robot_a
            )));
        }
        let graph = self
            .graphs
            .get_mut(&res.set_id)
            .ok_or_else(|| ContractError::NotFound(format!("set {}", res.set_id)))?;
        let slot = graph.edges.get_mut(&res.edge()).ok_or_else(|| {
            ContractError::NotFound(format!(
                "edge ({}, {}) in set {}",
                res.robot_a.0, res.robot_b.0, res.set_id
            ))
        })?;
        if slot.is_some() {
            return Err(ContractError::Duplicate(format!(
                "edge ({}, {}) in set {}",
                res.robot_a.0, res.robot_b.0, res.set_id
            )));
        }
        *slot = Some(res.anomaly);
        let complete = graph.is_complete();
        if res.anomaly {
            self.scores[res.robot_a.index()] += 1;
            self.scores[res.robot_b.index()] += 1;
        }
        self.audit.push(AuditEvent::ComparisonRecorded {
            set_id: res.set_id,
            robot_a: res.robot_a,
            robot_b: res.robot_b,
            anomaly: res.anomaly,
        });
        if complete {
            self.completed_sets += 1;
            self.audit.push(AuditEvent::SetCompleted { set_id: res.set_id });
            self.classify();
        }
        Ok(complete)
    }

    /// Flags robots above the threshold once enough sets are complete.
    /// Returns the robots newly flagged by this call.
    pub fn classify(&mut self) -> Vec<RobotId> {
        if self.completed_sets < self.config.min_completed_sets {
            return Vec::new();
        }
        let over = above_threshold(&self.scores, self.config.m).expect("n >= 4");
        let mut fresh = Vec::new();
        for robot in over {
            let flag = &mut self.byz_flags[robot.index()];
            if !*flag {
                *flag = true;
                fresh.push(robot);
                self.audit.push(AuditEvent::RobotFlagged { robot });
            }
        }
        fresh
    }

    pub fn get_robot_state(&self, robot: RobotId) -> Result<bool, ContractError> {
        self.byz_flags
            .get(robot.index())
            .copied()
            .ok_or_else(|| ContractError::NotFound(format!("{robot}")))
    }

    pub(crate) fn record_rejection(&mut self, seq: u64, op: &str, reason: String) {
        self.audit.push(AuditEvent::Rejected {
            seq,
            op: op.to_string(),
            reason,
        });
    }

    pub(crate) fn parts(
        &self,
    ) -> (
        &ContractConfig,
        &[u64],
        &[bool],
        &SpatialGrid,
        &[IntersectionSet],
        &BTreeMap<u64, ComparisonGraph>,
        u64,
        &[AuditEvent],
    ) {
        (
            &self.config,
            &self.scores,
            &self.byz_flags,
            &self.grid,
            &self.intersections,
            &self.graphs,
            self.completed_sets,
            &self.audit,
        )
    }
}
