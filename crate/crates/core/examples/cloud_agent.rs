//! The processing cloud polling the contract and judging image pairs, with
//! an exact and a noisy comparison back-end.
//!
//! ```text
//! cargo run --example cloud_agent
//! ```

use byzvision::contract::ContractState;
use byzvision::oracle::{
    CloudAgent, ComparisonOracle, ExactOracle, ImageStore, NoisyOracle, NoisyOracleConfig,
    SceneToken,
};
use byzvision::{Caller, ContractConfig, ImageDigest, PairRecord, Pose, RobotId, Timestamp};

/// Four co-located images; robot 0's shows a different scene.
fn setup(rounds: u64) -> (ContractState, ImageStore) {
    let mut state = ContractState::init(ContractConfig::reference()).unwrap();
    let mut store = ImageStore::new();
    for round in 0..rounds {
        for r in 0..4u32 {
            let digest = ImageDigest::of_bytes(format!("{round}/{r}").as_bytes());
            let token = if r == 0 { SceneToken(round + 1000) } else { SceneToken(round) };
            store.insert(digest, token);
            let pair = PairRecord {
                robot: RobotId(r),
                digest,
                pose: Pose::new(5.0 * round as f64 + 0.01 * r as f64, 0.3, 0.0),
                time: Timestamp(round as f64),
            };
            state.submit_pair(Caller::Robot(RobotId(r)), pair).unwrap();
        }
    }
    (state, store)
}

fn run<O: ComparisonOracle>(label: &str, oracle: O) {
    let (mut state, store) = setup(20);
    let agent = CloudAgent::with_store(oracle, store);
    let first = agent.step(&mut state);
    let second = agent.step(&mut state);
    println!(
        "{label}: {} verdicts on the first poll, {} on the second",
        first.submitted.len(),
        second.submitted.len()
    );
    println!("  scores {:?}, flags {:?}", state.scores(), state.byz_flags());
}

fn main() {
    run("exact", ExactOracle);
    let noisy = NoisyOracle::new(NoisyOracleConfig {
        alpha: 0.15,
        beta: 0.15,
        seed: 3,
    })
    .unwrap();
    run("noisy", noisy);
}
