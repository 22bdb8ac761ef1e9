//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use byzvision::contract::{above_threshold, compute_threshold, ContractState};
use byzvision::ledger::{Applied, LedgerLog, Operation, Replica};
use byzvision::sim::run_experiment;
use byzvision::{Caller, ContractConfig, RobotId, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::grid::{incremental_coverage, qualifying_points, random_instance, shared_cells};
use common::{complete_set, config, fixture, pair, publish_set};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {:.2?}, limit {:.0?}", elapsed, limit)
    })
}

fn thresholds() -> Outcome {
    let cases: [([u64; 4], f64); 3] = [
        ([3, 1, 1, 1], 1.995),
        ([13, 5, 6, 4], 9.31),
        ([43, 19, 20, 16], 32.585),
    ];
    let mut worst: f64 = 0.0;
    for (scores, want) in cases {
        let got = compute_threshold(&scores, ContractConfig::M_FIGURE).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= 1e-9, || format!("{scores:?}: {got} vs {want}"))?;
    }
    Ok(format!("max error {worst:.1e}"))
}

fn final_classification() -> Outcome {
    let flagged = above_threshold(&[43, 19, 20, 16], ContractConfig::M_FIGURE)
        .map_err(|e| e.to_string())?;
    ensure(flagged == [RobotId(0)], || format!("flagged {flagged:?}"))?;
    Ok("only the 43-score robot".into())
}

fn scoring_semantics() -> Outcome {
    let mut state = ContractState::init(config(ContractConfig::M_FIGURE)).map_err(|e| e.to_string())?;
    let id = publish_set(&mut state, 0);
    // The paper's robots 1..4 are ids 0..3.
    complete_set(&mut state, id, |a, _| a == 0);
    ensure(state.scores() == [3, 1, 1, 1], || format!("scores {:?}", state.scores()))?;
    Ok("deltas (3, 1, 1, 1)".into())
}

fn grid_completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..1000 {
        let pts = qualifying_points(&mut rng);
        ensure(!shared_cells(&pts).is_empty(), || format!("set {k} {pts:?} shares no cell"))?;
    }
    let mut emitted = 0;
    for _ in 0..100 {
        let records = random_instance(&mut rng, 50, 5);
        emitted += std::panic::catch_unwind(|| incremental_coverage(&records))
            .map_err(|_| "coverage differs from brute force".to_string())?;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "1000 sets co-assigned, 100 instances match brute force ({emitted} sets), {:.2?}",
        start.elapsed()
    ))
}

fn perfect_oracle() -> Outcome {
    let start = Instant::now();
    let report = run_experiment(&fixture("perfect-oracle")).map_err(|e| e.to_string())?;
    let s = &report.summary;
    ensure(s.completed_sets >= 15, || format!("only {} sets", s.completed_sets))?;
    for (k, rows) in report.timeline.chunks(4).enumerate() {
        let k = k as u64 + 1;
        let scores: Vec<u64> = rows.iter().map(|r| r.score).collect();
        ensure(scores == [3 * k, k, k, k], || format!("after {k} sets: {scores:?}"))?;
    }
    let first = report.timeline.first().map(|r| r.time);
    ensure(report.verdicts[0].flag_time == first, || {
        format!("byzantine flagged at {:?}, first set at {first:?}", report.verdicts[0].flag_time)
    })?;
    ensure(report.verdicts[1..].iter().all(|v| !v.flagged), || "honest robot flagged".into())?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{} sets, final scores {:?}, {:.2?}", s.completed_sets, s.final_scores, start.elapsed()))
}

fn noisy_oracle() -> Outcome {
    let start = Instant::now();
    let mut cfg = fixture("noisy");
    cfg.verify_replicas = false;
    let (mut caught, mut clean, mut fewest) = (0, 0, u64::MAX);
    for seed in 0..100 {
        cfg.seed = seed;
        let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
        fewest = fewest.min(report.summary.emitted_sets);
        caught += report.summary.flags[0] as u32;
        clean += report.summary.flags[1..].iter().all(|f| !f) as u32;
    }
    ensure(fewest >= 15, || format!("a run had only {fewest} sets"))?;
    ensure(caught >= 95, || format!("byzantine flagged in {caught}/100"))?;
    ensure(clean >= 95, || format!("no honest flag in {clean}/100"))?;
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "byzantine flagged {caught}/100, no honest flag {clean}/100, {:.2?}",
        start.elapsed()
    ))
}

fn replica_determinism() -> Outcome {
    let start = Instant::now();
    let cfg = fixture("noisy");
    // The runner itself compares all n + 1 replicas after every transaction.
    let report = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut replicas: Vec<Replica> = (0..=cfg.contract.n).map(Replica::new).collect();
    for tx in report.ledger.entries() {
        for r in &mut replicas {
            r.apply(tx).map_err(|e| e.to_string())?;
        }
        let d = replicas[0].digest();
        ensure(replicas.iter().all(|r| r.digest() == d), || format!("diverged at seq {}", tx.seq))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    report.write_dir(dir.path()).map_err(|e| e.to_string())?;
    let ledger = dir.path().join("ledger.log");
    let replay = || {
        Command::new(env!("CARGO_BIN_EXE_byzvision"))
            .args(["replay", "--ledger"])
            .arg(&ledger)
            .output()
            .map_err(|e| e.to_string())
    };
    let out = replay()?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success() && text.contains(&report.summary.final_digest.to_hex()), || {
        format!("replay did not reproduce the digest: {text}")
    })?;

    let original = fs::read(&ledger).map_err(|e| e.to_string())?;
    let mut mutated = original.clone();
    let pos = original.len() / 3;
    mutated[pos] ^= 0x01;
    fs::write(&ledger, &mutated).map_err(|e| e.to_string())?;
    let out = replay()?;
    ensure(out.status.code() == Some(1), || format!("mutated log exited {:?}", out.status.code()))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "{} replicas agree over {} entries, replay matches, mutation rejected",
        replicas.len(),
        report.ledger.len()
    ))
}

fn scale_note() -> Outcome {
    let report = run_experiment(&fixture("perfect-oracle")).map_err(|e| e.to_string())?;
    let sets = report.summary.emitted_sets;
    ensure((15..=20).contains(&sets), || format!("fixture produced {sets} sets"))?;

    let packed = median_submit_pair(|rng, _| rng.gen_range(-3.1..3.1))?;
    // Each robot faces its own quadrant, so no set ever forms and every
    // scan searches its cells in full.
    let unmatched = median_submit_pair(|rng, robot| {
        robot as f64 * std::f64::consts::FRAC_PI_2 + rng.gen_range(-0.1..0.1)
    })?;
    for (label, median) in [("random headings", packed), ("no matches", unmatched)] {
        ensure(median < Duration::from_millis(1), || format!("{label}: median {median:.2?}"))?;
    }
    Ok(format!(
        "fixture {sets} sets; median submitPair at 10,000 pairs {packed:.2?} (random headings), {unmatched:.2?} (no matches)"
    ))
}

/// Fills a replica with 10,000 pairs spread over the arena, then returns
/// the median time to apply one more submitPair transaction.
fn median_submit_pair(heading: impl Fn(&mut ChaCha8Rng, u32) -> f64) -> Result<Duration, String> {
    let side = 48f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut log = LedgerLog::new();
    let mut replica = Replica::new(0);
    let submit = |log: &mut LedgerLog, replica: &mut Replica, caller, op: &Operation| {
        let seq = log.submit(caller, op, Timestamp(0.0)).unwrap();
        let tx = log.entries()[seq as usize].clone();
        let t = Instant::now();
        let applied = replica.apply(&tx).unwrap();
        (t.elapsed(), applied)
    };
    submit(&mut log, &mut replica, Caller::Operator, &Operation::Init(ContractConfig::reference()));
    let mut random_pair = |k: u64| {
        let robot = rng.gen_range(0..4);
        let theta = heading(&mut rng, robot);
        pair(robot, k, rng.gen_range(0.0..side), rng.gen_range(0.0..side), theta, k as f64)
    };
    for k in 0..10_000 {
        let p = random_pair(k);
        submit(&mut log, &mut replica, Caller::Robot(p.robot), &Operation::SubmitPair(p));
    }
    let mut times = Vec::new();
    for k in 10_000..10_201 {
        let p = random_pair(k);
        let (t, applied) = submit(&mut log, &mut replica, Caller::Robot(p.robot), &Operation::SubmitPair(p));
        ensure(matches!(applied, Applied::PairAccepted { .. }), || format!("{applied:?}"))?;
        times.push(t);
    }
    times.sort();
    Ok(times[times.len() / 2])
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("threshold reproduction", thresholds),
        ("final classification", final_classification),
        ("scoring semantics", scoring_semantics),
        ("grid completeness", grid_completeness),
        ("perfect-oracle end-to-end", perfect_oracle),
        ("noisy-oracle robustness", noisy_oracle),
        ("replica determinism", replica_determinism),
        ("scale substitute", scale_note),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} PASS {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
