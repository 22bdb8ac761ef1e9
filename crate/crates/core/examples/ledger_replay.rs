//! Ordering contract calls on the ledger, applying them on several
//! replicas, and replaying the written log file.
//!
//! ```text
//! cargo run --example ledger_replay
//! ```

use byzvision::ledger::{replay, state_digest, LedgerLog, Operation, Replica};
use byzvision::{Caller, CompResult, ContractConfig, ImageDigest, PairRecord, Pose, RobotId, Timestamp};

fn main() {
    let mut log = LedgerLog::new();
    log.submit(Caller::Operator, &Operation::Init(ContractConfig::reference()), Timestamp(0.0))
        .unwrap();
    for r in 0..4u32 {
        let pair = PairRecord {
            robot: RobotId(r),
            digest: ImageDigest::of_bytes(&[r as u8]),
            pose: Pose::new(1.0, 1.0 + 0.1 * r as f64, 0.0),
            time: Timestamp(1.0 + r as f64),
        };
        log.submit(Caller::Robot(RobotId(r)), &Operation::SubmitPair(pair), pair.time)
            .unwrap();
    }
    // A robot trying to submit a verdict is ordered and rejected on every
    // replica alike.
    let verdict = CompResult {
        set_id: 0,
        robot_a: RobotId(0),
        robot_b: RobotId(1),
        anomaly: false,
    };
    log.submit(Caller::Robot(RobotId(2)), &Operation::SubmitComparison(verdict), Timestamp(5.0))
        .unwrap();
    log.submit(Caller::Cloud, &Operation::SubmitComparison(verdict), Timestamp(5.0))
        .unwrap();

    let mut replicas: Vec<Replica> = (0..5).map(Replica::new).collect();
    for tx in log.entries() {
        let outcomes: Vec<_> = replicas.iter_mut().map(|r| r.apply(tx).unwrap()).collect();
        let digest = replicas[0].digest().unwrap();
        let agree = replicas.iter().all(|r| r.digest() == Some(digest));
        println!("seq {} {:<16} agree={agree} {:?}", tx.seq, tx.op.name(), outcomes[0]);
    }

    let text = log.to_text();
    println!("\nlog file, {} bytes:\n{}", text.len(), text.lines().next().unwrap());
    let read = LedgerLog::parse(&text).unwrap();
    let state = replay(read.log.entries()).unwrap();
    println!("replayed digest {}", state_digest(&state));
    println!("live digest     {}", replicas[0].digest().unwrap());

    let tampered = text.replacen("robot:1", "robot:3", 1);
    println!("\ntampered file: {}", LedgerLog::parse(&tampered).unwrap_err());
}
