//! Threshold rule on the scores of the four-robot field experiment.
//!
//! ```text
//! cargo run --example thresholds
//! ```

use byzvision::contract::{above_threshold, compute_threshold};
use byzvision::ContractConfig;

fn main() {
    let timeline: [[u64; 4]; 3] = [[3, 1, 1, 1], [13, 5, 6, 4], [43, 19, 20, 16]];
    for m in [ContractConfig::M_TEXT, ContractConfig::M_FIGURE] {
        println!("m = {m}");
        for scores in timeline {
            let t = compute_threshold(&scores, m).unwrap();
            let flagged: Vec<u32> = above_threshold(&scores, m)
                .unwrap()
                .into_iter()
                .map(|r| r.0)
                .collect();
            println!("  scores {scores:?}  threshold {t:.3}  flagged {flagged:?}");
        }
    }
}
