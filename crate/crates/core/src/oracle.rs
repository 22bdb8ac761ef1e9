//! The processing cloud: image storage, pairwise comparison back-ends and
//! the agent that polls the contract for pending sets.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contract::{Caller, CompResult, ContractState};
use crate::grid::IntersectionSet;
use crate::types::{ImageDigest, RobotId};

/// Stand-in for image content: equal tokens mean the images show the same
/// scene.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SceneToken(pub u64);

impl SceneToken {
    pub fn derive(parts: &[&[u8]]) -> Self {
        let mut h = Sha256::new();
        for p in parts {
            h.update((p.len() as u32).to_le_bytes());
            h.update(p);
        }
        let out = h.finalize();
        SceneToken(u64::from_le_bytes(out[..8].try_into().unwrap()))
    }
}

impl fmt::Debug for SceneToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SceneToken({:016x})", self.0)
    }
}

/// One stored image as the comparison module sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoredImage {
    pub digest: ImageDigest,
    pub token: SceneToken,
}

pub trait ComparisonOracle {
    /// True when the two images disagree. Must be symmetric.
    fn compare(&self, a: &StoredImage, b: &StoredImage) -> bool;
}

impl<O: ComparisonOracle + ?Sized> ComparisonOracle for Box<O> {
    fn compare(&self, a: &StoredImage, b: &StoredImage) -> bool {
        (**self).compare(a, b)
    }
}

/// Reports a difference exactly when the scene tokens differ.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactOracle;

impl ComparisonOracle for ExactOracle {
    fn compare(&self, a: &StoredImage, b: &StoredImage) -> bool {
        a.token != b.token
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("noise rates must lie in [0, 1): alpha = {alpha}, beta = {beta}")]
pub struct NoiseRateError {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisyOracleConfig {
    /// Probability of reporting a difference between matching images.
    pub alpha: f64,
    /// Probability of missing a real difference.
    pub beta: f64,
    pub seed: u64,
}

/// Exact comparison with seeded false positives and false negatives.
///
/// The draw for a pair depends only on the seed and the unordered pair of
/// digests, so repeated or swapped calls give the same answer.
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    config: NoisyOracleConfig,
}

impl NoisyOracle {
    pub fn new(config: NoisyOracleConfig) -> Result<Self, NoiseRateError> {
        let ok = |r: f64| (0.0..1.0).contains(&r);
        if !(ok(config.alpha) && ok(config.beta)) {
            return Err(NoiseRateError {
                alpha: config.alpha,
                beta: config.beta,
            });
        }
        Ok(NoisyOracle { config })
    }

    pub fn config(&self) -> &NoisyOracleConfig {
        &self.config
    }

    fn draw(&self, a: &ImageDigest, b: &ImageDigest) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut h = Sha256::new();
        h.update(self.config.seed.to_le_bytes());
        h.update(lo.as_bytes());
        h.update(hi.as_bytes());
        let seed: [u8; 32] = h.finalize().into();
        ChaCha8Rng::from_seed(seed).gen::<f64>()
    }
}

impl ComparisonOracle for NoisyOracle {
    fn compare(&self, a: &StoredImage, b: &StoredImage) -> bool {
        let u = self.draw(&a.digest, &b.digest);
        if a.token != b.token {
            u >= self.config.beta
        } else {
            u < self.config.alpha
        }
    }
}

/// The cloud's image storage, keyed by digest.
#[derive(Debug, Clone, Default)]
pub struct ImageStore {
    images: BTreeMap<ImageDigest, SceneToken>,
}

impl ImageStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, digest: ImageDigest, token: SceneToken) {
        self.images.insert(digest, token);
    }

    pub fn get(&self, digest: &ImageDigest) -> Option<StoredImage> {
        self.images
            .get(digest)
            .map(|&token| StoredImage { digest: *digest, token })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Read and submit access to the contract, as the cloud sees it.
pub trait ContractPort {
    /// Sets with missing verdicts, each with its empty edge slots.
    fn pending(&self) -> Vec<(IntersectionSet, Vec<(RobotId, RobotId)>)>;
    fn submit_comparison(&mut self, res: CompResult) -> Result<(), String>;
}

impl ContractPort for ContractState {
    fn pending(&self) -> Vec<(IntersectionSet, Vec<(RobotId, RobotId)>)> {
        self.get_intersection()
            .into_iter()
            .map(|set| {
                let missing = self
                    .graph(set.set_id)
                    .map(|g| g.missing().collect())
                    .unwrap_or_default();
                (set.clone(), missing)
            })
            .collect()
    }

    fn submit_comparison(&mut self, res: CompResult) -> Result<(), String> {
        ContractState::submit_comparison(self, Caller::Cloud, res)
            .map(|_| ())
            .map_err(|e| e.to_string())
    }
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct StepReport {
    pub submitted: Vec<CompResult>,
    pub rejected: Vec<(CompResult, String)>,
    /// Digests named by a set but absent from storage.
    pub missing_images: Vec<ImageDigest>,
}

/// Polls for pending sets and submits one verdict per missing edge.
pub struct CloudAgent<O> {
    store: ImageStore,
    oracle: O,
}

impl<O: ComparisonOracle> CloudAgent<O> {
    pub fn new(oracle: O) -> Self {
        CloudAgent {
            store: ImageStore::new(),
            oracle,
        }
    }

    pub fn with_store(oracle: O, store: ImageStore) -> Self {
        CloudAgent { store, oracle }
    }

    pub fn store(&self) -> &ImageStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ImageStore {
        &mut self.store
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    /// Edges already filled are skipped, so a restarted agent only finishes
    /// what is left and a repeated step submits nothing.
    pub fn step<P: ContractPort + ?Sized>(&self, port: &mut P) -> StepReport {
        let mut report = StepReport::default();
        for (set, missing) in port.pending() {
            for (a, b) in missing {
                let (Some(ma), Some(mb)) = (set.member(a), set.member(b)) else {
                    continue;
                };
                let (Some(ia), Some(ib)) = (self.store.get(&ma.digest), self.store.get(&mb.digest))
                else {
                    for m in [ma, mb] {
                        if self.store.get(&m.digest).is_none()
                            && !report.missing_images.contains(&m.digest)
                        {
                            report.missing_images.push(m.digest);
                        }
                    }
                    continue;
                };
                let res = CompResult {
                    set_id: set.set_id,
                    robot_a: a,
                    robot_b: b,
                    anomaly: self.oracle.compare(&ia, &ib),
                };
                match port.submit_comparison(res) {
                    Ok(()) => report.submitted.push(res),
                    Err(e) => {
                        log::warn!("comparison for set {} rejected: {e}", set.set_id);
                        report.rejected.push((res, e));
                    }
                }
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ContractConfig, PairRecord, Pose, Timestamp};

    fn image(tag: u64, token: u64) -> StoredImage {
        StoredImage {
            digest: ImageDigest::of_bytes(&tag.to_le_bytes()),
            token: SceneToken(token),
        }
    }

    #[test]
    fn exact_oracle_follows_tokens() {
        assert!(!ExactOracle.compare(&image(1, 5), &image(2, 5)));
        assert!(ExactOracle.compare(&image(1, 5), &image(2, 6)));
        for k in 0..200u64 {
            let (a, b) = (image(k, k % 3), image(k + 1000, k % 5));
            assert_eq!(ExactOracle.compare(&a, &b), ExactOracle.compare(&b, &a));
        }
    }

    #[test]
    fn zero_noise_matches_exact() {
        let noisy = NoisyOracle::new(NoisyOracleConfig {
            alpha: 0.0,
            beta: 0.0,
            seed: 3,
        })
        .unwrap();
        for k in 0..2000u64 {
            let (a, b) = (image(k, k % 4), image(k + 7, k % 3));
            assert_eq!(noisy.compare(&a, &b), ExactOracle.compare(&a, &b));
        }
    }

    #[test]
    fn false_positive_rate_monte_carlo() {
        let noisy = NoisyOracle::new(NoisyOracleConfig {
            alpha: 0.15,
            beta: 0.0,
            seed: 99,
        })
        .unwrap();
        let trials = 10_000u64;
        let hits = (0..trials)
            .filter(|&k| noisy.compare(&image(2 * k, 1), &image(2 * k + 1, 1)))
            .count();
        let rate = hits as f64 / trials as f64;
        assert!((rate - 0.15).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn false_negative_rate_monte_carlo() {
        let noisy = NoisyOracle::new(NoisyOracleConfig {
            alpha: 0.0,
            beta: 0.15,
            seed: 5,
        })
        .unwrap();
        let trials = 10_000u64;
        let misses = (0..trials)
            .filter(|&k| !noisy.compare(&image(2 * k, 1), &image(2 * k + 1, 2)))
            .count();
        let rate = misses as f64 / trials as f64;
        assert!((rate - 0.15).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn noisy_is_deterministic_and_symmetric() {
        let cfg = NoisyOracleConfig {
            alpha: 0.4,
            beta: 0.4,
            seed: 17,
        };
        let one = NoisyOracle::new(cfg).unwrap();
        let two = NoisyOracle::new(cfg).unwrap();
        for k in 0..500u64 {
            let (a, b) = (image(k, k % 2), image(k + 3, 0));
            let v = one.compare(&a, &b);
            assert_eq!(v, one.compare(&a, &b));
            assert_eq!(v, one.compare(&b, &a));
            assert_eq!(v, two.compare(&a, &b));
        }
    }

    #[test]
    fn noise_rates_validated() {
        let bad = NoisyOracleConfig {
            alpha: 1.0,
            beta: 0.1,
            seed: 0,
        };
        assert!(NoisyOracle::new(bad).is_err());
        let bad = NoisyOracleConfig {
            alpha: 0.1,
            beta: -0.1,
            seed: 0,
        };
        assert!(NoisyOracle::new(bad).is_err());
    }

    fn contract_with_set() -> (ContractState, ImageStore) {
        let mut st = ContractState::init(ContractConfig::reference()).unwrap();
        let mut store = ImageStore::new();
        for r in 0..4u32 {
            let digest = ImageDigest::of_bytes(&[r as u8, 1]);
            st.submit_pair(
                Caller::Robot(RobotId(r)),
                PairRecord {
                    robot: RobotId(r),
                    digest,
                    pose: Pose::new(2.2, 2.2, 0.0),
                    time: Timestamp(1.0),
                },
            )
            .unwrap();
            store.insert(digest, SceneToken(if r == 0 { 666 } else { 1 }));
        }
        (st, store)
    }

    #[test]
    fn agent_fills_every_edge_once() {
        let (mut st, store) = contract_with_set();
        let agent = CloudAgent::with_store(ExactOracle, store);
        let report = agent.step(&mut st);
        assert_eq!(report.submitted.len(), 6);
        assert!(report.rejected.is_empty());
        assert_eq!(st.scores(), &[3, 1, 1, 1]);
        assert_eq!(agent.step(&mut st), StepReport::default());
    }

    #[test]
    fn agent_with_nothing_pending_is_idle() {
        let mut st = ContractState::init(ContractConfig::reference()).unwrap();
        let agent = CloudAgent::new(ExactOracle);
        assert!(agent.step(&mut st).submitted.is_empty());
    }

    #[test]
    fn restarted_agent_finishes_remaining_edges() {
        let (mut st, store) = contract_with_set();
        // A first agent gets two verdicts in before going away.
        for (a, b) in [(0, 1), (2, 3)] {
            ContractState::submit_comparison(
                &mut st,
                Caller::Cloud,
                CompResult {
                    set_id: 0,
                    robot_a: RobotId(a),
                    robot_b: RobotId(b),
                    anomaly: a == 0,
                },
            )
            .unwrap();
        }
        let agent = CloudAgent::with_store(ExactOracle, store);
        let report = agent.step(&mut st);
        assert_eq!(report.submitted.len(), 4);
        assert!(report.rejected.is_empty());
        assert_eq!(st.completed_sets(), 1);
        assert_eq!(st.scores(), &[3, 1, 1, 1]);
    }

    #[test]
    fn missing_images_are_reported_not_fatal() {
        let (mut st, _) = contract_with_set();
        let agent = CloudAgent::new(ExactOracle);
        let report = agent.step(&mut st);
        assert!(report.submitted.is_empty());
        assert_eq!(report.missing_images.len(), 4);
    }
}
