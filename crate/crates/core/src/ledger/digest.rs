use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::codec::{put_config, put_pair, Encoder};
use crate::contract::{AuditEvent, ContractState};
use crate::grid::CellIndex;

/// SHA-256 over the canonical encoding of a [`ContractState`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct StateDigest(pub [u8; 32]);

impl StateDigest {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl From<StateDigest> for String {
    fn from(d: StateDigest) -> String {
        d.to_hex()
    }
}

impl TryFrom<String> for StateDigest {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        let raw = hex::decode(&s).map_err(|e| e.to_string())?;
        <[u8; 32]>::try_from(raw.as_slice())
            .map(StateDigest)
            .map_err(|_| format!("expected 32 bytes, got {}", raw.len()))
    }
}

impl fmt::Display for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for StateDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateDigest({})", self.to_hex())
    }
}

fn put_cell(e: &mut Encoder, c: &CellIndex) {
    e.i64(c.i).i64(c.j);
}

fn put_event(e: &mut Encoder, ev: &AuditEvent) {
    match ev {
        AuditEvent::Initialized => {
            e.u8(0);
        }
        AuditEvent::PairAccepted { robot, digest } => {
            e.u8(1).u32(robot.0).str(digest);
        }
        AuditEvent::SetPublished { set_id } => {
            e.u8(2).u64(*set_id);
        }
        AuditEvent::ComparisonRecorded {
            set_id,
            robot_a,
            robot_b,
            anomaly,
        } => {
            e.u8(3).u64(*set_id).u32(robot_a.0).u32(robot_b.0).bool(*anomaly);
        }
        AuditEvent::SetCompleted { set_id } => {
            e.u8(4).u64(*set_id);
        }
        AuditEvent::RobotFlagged { robot } => {
            e.u8(5).u32(robot.0);
        }
        AuditEvent::Rejected { seq, op, reason } => {
            e.u8(6).u64(*seq).str(op).str(reason);
        }
    }
}

/// Canonical byte encoding of the whole contract state.
pub fn canonical_state_bytes(state: &ContractState) -> Vec<u8> {
    let (config, scores, flags, grid, sets, graphs, completed, audit) = state.parts();
    let mut e = Encoder::new();
    e.bytes(b"byzvision/state/v1");
    put_config(&mut e, config);

    e.u32(scores.len() as u32);
    for s in scores {
        e.u64(*s);
    }
    e.u32(flags.len() as u32);
    for f in flags {
        e.bool(*f);
    }

    e.f64(grid.d()).u32(grid.len() as u32);
    for rec in grid.records() {
        put_pair(&mut e, rec);
        e.bool(grid.is_consumed(&rec.digest));
    }
    e.u32(grid.emitted_cells().len() as u32);
    for c in grid.emitted_cells() {
        put_cell(&mut e, c);
    }
    e.u32(grid.pending_scan().len() as u32);
    for c in grid.pending_scan() {
        put_cell(&mut e, c);
    }
    e.u64(grid.next_set_id());

    e.u32(sets.len() as u32);
    for set in sets {
        e.u64(set.set_id);
        put_cell(&mut e, &set.origin_cell);
        e.u32(set.members.len() as u32);
        for m in &set.members {
            e.bytes(m.digest.as_bytes());
        }
    }
    e.u32(graphs.len() as u32);
    for g in graphs.values() {
        e.u64(g.set_id).u32(g.slots() as u32);
        for ((a, b), v) in g.edges() {
            e.u32(a.0).u32(b.0);
            e.u8(match v {
                None => 0,
                Some(false) => 1,
                Some(true) => 2,
            });
        }
    }
    e.u64(completed);

    e.u32(audit.len() as u32);
    for ev in audit {
        put_event(&mut e, ev);
    }
    e.finish()
}

pub fn state_digest(state: &ContractState) -> StateDigest {
    StateDigest(Sha256::digest(canonical_state_bytes(state)).into())
}
