//! One intersection set from submission to classification, called directly
//! on the contract state.
//!
//! ```text
//! cargo run --example contract_walkthrough
//! ```

use byzvision::contract::ContractState;
use byzvision::{Caller, CompResult, ContractConfig, ImageDigest, PairRecord, Pose, RobotId, Timestamp};

fn main() {
    let mut state = ContractState::init(ContractConfig::reference()).unwrap();

    for r in 0..4u32 {
        let pair = PairRecord {
            robot: RobotId(r),
            digest: ImageDigest::of_bytes(&[r as u8]),
            pose: Pose::new(2.0 + 0.05 * r as f64, 1.0, 0.1),
            time: Timestamp(10.0 + r as f64),
        };
        let sets = state.submit_pair(Caller::Robot(RobotId(r)), pair).unwrap();
        println!("robot {r} submitted, {} set(s) published", sets.len());
    }

    // Robots may not speak for each other, and only the cloud judges images.
    let forged = PairRecord {
        robot: RobotId(1),
        digest: ImageDigest::of_bytes(b"forged"),
        pose: Pose::new(2.0, 1.0, 0.0),
        time: Timestamp(20.0),
    };
    println!("robot 0 submitting for robot 1: {:?}", state.submit_pair(Caller::Robot(RobotId(0)), forged).unwrap_err());

    let pending = state.get_intersection();
    let set_id = pending[0].set_id;
    println!("pending sets: {:?}", pending.iter().map(|s| s.set_id).collect::<Vec<_>>());

    // Robot 0's image disagrees with everyone else's.
    for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let res = CompResult {
            set_id,
            robot_a: RobotId(a),
            robot_b: RobotId(b),
            anomaly: a == 0,
        };
        let completed = state.submit_comparison(Caller::Cloud, res).unwrap();
        println!("edge ({a}, {b}) red={} completed={completed}", res.anomaly);
    }

    println!("scores {:?}, threshold {:.2}", state.scores(), state.threshold());
    for r in 0..4 {
        println!("robot {r} byzantine: {}", state.get_robot_state(RobotId(r)).unwrap());
    }
    println!("audit trail:");
    for ev in state.audit() {
        println!("  {}", serde_json::to_string(ev).unwrap());
    }
}
