use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::contract::{compute_threshold, Caller, CompResult, ContractState};
use crate::grid::IntersectionSet;
use crate::ledger::{Applied, LedgerLog, Operation, Replica};
use crate::oracle::{CloudAgent, ComparisonOracle, ContractPort, ExactOracle, NoisyOracle, NoisyOracleConfig};
use crate::report::{IntersectionRow, RunReport, RunSummary, ScoreRow, TrajectoryRow, VerdictRow};
use crate::types::{PairRecord, Pose, RobotId, Timestamp};

use super::agent::RobotAgent;
use super::config::{OracleSpec, SimConfig};
use super::sync::{associate_pose, sample_stream, sample_times};
use super::SimError;

/// The sequencer plus one replica per robot and one for the cloud.
struct Chain {
    log: LedgerLog,
    replicas: Vec<Replica>,
    verify: bool,
}

impl Chain {
    fn new(nodes: usize, verify: bool) -> Self {
        Chain {
            log: LedgerLog::new(),
            replicas: (0..nodes as u32).map(Replica::new).collect(),
            verify,
        }
    }

    fn submit(&mut self, caller: Caller, op: &Operation, ts: Timestamp) -> Result<Applied, SimError> {
        let seq = self.log.submit(caller, op, ts)?;
        let tx = &self.log.entries()[seq as usize];
        let mut outcome = None;
        for replica in &mut self.replicas {
            let applied = replica.apply(tx)?;
            outcome.get_or_insert(applied);
        }
        if self.verify {
            let reference = self.replicas[0].digest();
            if let Some(r) = self.replicas[1..].iter().find(|r| r.digest() != reference) {
                return Err(SimError::Divergence {
                    node: r.node_id,
                    seq,
                });
            }
        }
        Ok(outcome.expect("at least one replica"))
    }

    fn state(&self) -> &ContractState {
        self.replicas[0].state().expect("contract initialized first")
    }
}

/// Everything the loop records besides the ledger itself.
#[derive(Default)]
struct Recorder {
    timeline: Vec<ScoreRow>,
    intersections: BTreeMap<u64, IntersectionRow>,
    flag_times: Vec<Option<f64>>,
}

impl Recorder {
    fn on_sets(&mut self, sets: &[IntersectionSet], t: Timestamp) {
        for set in sets {
            self.intersections.insert(set.set_id, intersection_row(set, t));
        }
    }

    fn on_completed(&mut self, set_id: u64, state: &ContractState, t: Timestamp) {
        if let Some(row) = self.intersections.get_mut(&set_id) {
            row.completed_at = Some(t.0);
        }
        let threshold = state.threshold();
        for (k, &score) in state.scores().iter().enumerate() {
            self.timeline.push(ScoreRow {
                time: t.0,
                robot: k as u32,
                score,
                threshold,
            });
        }
        for (k, &flag) in state.byz_flags().iter().enumerate() {
            if flag && self.flag_times[k].is_none() {
                self.flag_times[k] = Some(t.0);
            }
        }
    }
}

fn intersection_row(set: &IntersectionSet, t: Timestamp) -> IntersectionRow {
    let k = set.members.len() as f64;
    let (mut x, mut y, mut s, mut c) = (0.0, 0.0, 0.0, 0.0);
    for m in &set.members {
        x += m.pose.x;
        y += m.pose.y;
        s += m.pose.theta.sin();
        c += m.pose.theta.cos();
    }
    IntersectionRow {
        set_id: set.set_id,
        time: t.0,
        x: x / k,
        y: y / k,
        heading: s.atan2(c),
        robots: set.members.iter().map(|m| m.robot.0).collect(),
        digests: set.members.iter().map(|m| m.digest).collect(),
        completed_at: None,
    }
}

/// The cloud's view of the contract: reads from a replica, writes through
/// the sequencer.
struct LedgerPort<'a> {
    chain: &'a mut Chain,
    recorder: &'a mut Recorder,
    now: Timestamp,
    failure: Option<SimError>,
}

impl ContractPort for LedgerPort<'_> {
    fn pending(&self) -> Vec<(IntersectionSet, Vec<(RobotId, RobotId)>)> {
        self.chain.state().pending()
    }

    fn submit_comparison(&mut self, res: CompResult) -> Result<(), String> {
        if self.failure.is_some() {
            return Err("run aborted".into());
        }
        match self
            .chain
            .submit(Caller::Cloud, &Operation::SubmitComparison(res), self.now)
        {
            Ok(Applied::ComparisonAccepted { completed_set }) => {
                if completed_set {
                    self.recorder
                        .on_completed(res.set_id, self.chain.state(), self.now);
                }
                Ok(())
            }
            Ok(Applied::Rejected(reason)) => Err(reason),
            Ok(other) => Err(format!("unexpected outcome {other:?}")),
            Err(e) => {
                let msg = e.to_string();
                self.failure = Some(e);
                Err(msg)
            }
        }
    }
}

fn noise_seed(run_seed: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"oracle-noise");
    h.update(run_seed.to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}

fn build_oracle(spec: OracleSpec, seed: u64) -> Result<Box<dyn ComparisonOracle>, SimError> {
    Ok(match spec {
        OracleSpec::Exact => Box::new(ExactOracle),
        OracleSpec::Noisy { alpha, beta } => Box::new(
            NoisyOracle::new(NoisyOracleConfig {
                alpha,
                beta,
                seed: noise_seed(seed),
            })
            .map_err(|e| SimError::Config(e.to_string()))?,
        ),
    })
}

struct RobotStreams {
    poses: Vec<(Timestamp, Pose)>,
    images: Vec<Timestamp>,
}

/// Pose samples and image times for one robot, both stopping when the
/// trajectory ends or the run does.
fn robot_streams(cfg: &SimConfig, k: usize) -> Result<RobotStreams, SimError> {
    let plan = cfg.robots[k].plan()?;
    let start = plan.start_time();
    let end = Timestamp(plan.end_time().0.min(cfg.duration));
    if start.0 > end.0 {
        return Ok(RobotStreams {
            poses: Vec::new(),
            images: Vec::new(),
        });
    }
    let poses = sample_stream(start, end, cfg.rates.pose_hz, |t| plan.pose_at(t))?;
    let images = sample_times(start, end, cfg.rates.image_hz);
    Ok(RobotStreams { poses, images })
}

/// Runs one experiment to completion.
///
/// Images are processed in time order, ties broken by robot id. All images
/// taken at one instant are submitted before the cloud polls, so the cloud
/// runs once per batch.
pub fn run_experiment(cfg: &SimConfig) -> Result<RunReport, SimError> {
    cfg.validate()?;
    let n = cfg.robots.len();
    let streams = (0..n)
        .map(|k| robot_streams(cfg, k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut agents: Vec<RobotAgent> = cfg
        .robots
        .iter()
        .enumerate()
        .map(|(k, r)| RobotAgent::new(RobotId(k as u32), r.behavior, cfg.seed))
        .collect();
    let mut cloud = CloudAgent::new(build_oracle(cfg.oracle, cfg.seed)?);

    let mut events: Vec<(Timestamp, usize)> = streams
        .iter()
        .enumerate()
        .flat_map(|(k, s)| s.images.iter().map(move |&t| (t, k)))
        .collect();
    events.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.1.cmp(&b.1)));

    let mut chain = Chain::new(n + 1, cfg.verify_replicas);
    chain.submit(Caller::Operator, &Operation::Init(cfg.contract), Timestamp(0.0))?;

    let mut recorder = Recorder {
        flag_times: vec![None; n],
        ..Recorder::default()
    };
    let mut trajectories = Vec::new();
    let mut dropped = 0u64;

    for batch in events.chunk_by(|a, b| a.0 == b.0) {
        let now = batch[0].0;
        for &(t, k) in batch {
            let pose = match associate_pose(t, &streams[k].poses, cfg.rates.staleness) {
                Ok(p) => p,
                Err(e) => {
                    log::debug!("robot {k}: image dropped: {e}");
                    dropped += 1;
                    continue;
                }
            };
            let truth = cfg.scene.token_at(&pose, t);
            let capture = agents[k].capture(pose, t, truth);
            cloud.store_mut().insert(capture.digest, capture.token);
            trajectories.push(TrajectoryRow {
                time: t.0,
                robot: k as u32,
                x: pose.x,
                y: pose.y,
                theta: pose.theta,
            });
            let robot = RobotId(k as u32);
            let pair = PairRecord {
                robot,
                digest: capture.digest,
                pose,
                time: t,
            };
            match chain.submit(Caller::Robot(robot), &Operation::SubmitPair(pair), t)? {
                Applied::PairAccepted { new_sets } => recorder.on_sets(&new_sets, t),
                Applied::Rejected(reason) => log::warn!("{robot}: pair rejected: {reason}"),
                _ => {}
            }
        }

        let mut port = LedgerPort {
            chain: &mut chain,
            recorder: &mut recorder,
            now,
            failure: None,
        };
        let step = cloud.step(&mut port);
        if let Some(e) = port.failure {
            return Err(e);
        }
        if !step.submitted.is_empty() {
            log::debug!("t={}: cloud submitted {} verdicts", now.0, step.submitted.len());
        }
    }

    let state = chain.state();
    let threshold = compute_threshold(state.scores(), state.config().m).unwrap_or(0.0);
    let verdicts = (0..n)
        .map(|k| VerdictRow {
            robot: k as u32,
            flagged: state.byz_flags()[k],
            flag_time: recorder.flag_times[k],
            score: state.scores()[k],
        })
        .collect();
    let summary = RunSummary {
        seed: cfg.seed,
        config: cfg.clone(),
        final_digest: chain.replicas[0].digest().expect("initialized"),
        ledger_entries: chain.log.len() as u64,
        emitted_sets: state.intersections().len() as u64,
        completed_sets: state.completed_sets(),
        final_scores: state.scores().to_vec(),
        threshold,
        flags: state.byz_flags().to_vec(),
        dropped_images: dropped,
    };
    log::info!(
        "run finished: {} sets, {} completed, flags {:?}",
        summary.emitted_sets,
        summary.completed_sets,
        summary.flags
    );
    Ok(RunReport {
        summary,
        timeline: recorder.timeline,
        intersections: recorder.intersections.into_values().collect(),
        verdicts,
        trajectories,
        ledger: chain.log,
    })
}
