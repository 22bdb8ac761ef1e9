//! Totally ordered transaction log with deterministic replay.
//!
//! A single sequencer stands in for the chain: [`LedgerLog::append`] assigns
//! gapless sequence numbers and every [`Replica`] folds the same entries
//! into its own [`ContractState`]. Contract-level rejections are recorded in
//! the audit trail and still advance the replica, so replicas agree on
//! failures as well as successes.

pub mod codec;
mod digest;
mod logfile;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contract::{Caller, CompResult, ContractError, ContractState};
use crate::grid::IntersectionSet;
use crate::types::{ContractConfig, PairRecord, RobotId, Timestamp};
use codec::{DecodeError, Decoder, Encoder};

pub use digest::{canonical_state_bytes, state_digest, StateDigest};
pub use logfile::{LogError, LogRead};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("malformed payload: {0}")]
    Malformed(#[from] DecodeError),
    #[error("payload decodes to an invalid operation: {0}")]
    InvalidOperation(String),
    #[error("out of order: expected seq {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error("replica is not initialized")]
    NotInitialized,
    #[error("initialization rejected: {0}")]
    InitRejected(ContractError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("replay halted at entry {index}: {source}")]
pub struct ReplayError {
    pub index: usize,
    pub source: LedgerError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    #[serde(rename = "init")]
    Init,
    #[serde(rename = "submitPair")]
    SubmitPair,
    #[serde(rename = "submitComparison")]
    SubmitComparison,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Init => "init",
            OpKind::SubmitPair => "submitPair",
            OpKind::SubmitComparison => "submitComparison",
        }
    }

    fn tag(self) -> u8 {
        match self {
            OpKind::Init => 0,
            OpKind::SubmitPair => 1,
            OpKind::SubmitComparison => 2,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "init" => Ok(OpKind::Init),
            "submitPair" => Ok(OpKind::SubmitPair),
            "submitComparison" => Ok(OpKind::SubmitComparison),
            other => Err(format!("unknown operation {other:?}")),
        }
    }
}

/// Decoded contract call.
#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    Init(ContractConfig),
    SubmitPair(PairRecord),
    SubmitComparison(CompResult),
}

impl Operation {
    pub fn kind(&self) -> OpKind {
        match self {
            Operation::Init(_) => OpKind::Init,
            Operation::SubmitPair(_) => OpKind::SubmitPair,
            Operation::SubmitComparison(_) => OpKind::SubmitComparison,
        }
    }

    pub fn payload(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        match self {
            Operation::Init(c) => codec::put_config(&mut e, c),
            Operation::SubmitPair(p) => codec::put_pair(&mut e, p),
            Operation::SubmitComparison(r) => codec::put_result(&mut e, r),
        }
        e.finish()
    }

    pub fn decode(kind: OpKind, payload: &[u8]) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(payload);
        let op = match kind {
            OpKind::Init => Operation::Init(codec::get_config(&mut dec)?),
            OpKind::SubmitPair => Operation::SubmitPair(codec::get_pair(&mut dec)?),
            OpKind::SubmitComparison => {
                Operation::SubmitComparison(codec::get_result(&mut dec)?)
            }
        };
        dec.finish()?;
        Ok(op)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transaction {
    pub seq: u64,
    pub caller: Caller,
    pub op: OpKind,
    pub payload: Vec<u8>,
    pub ts: Timestamp,
}

impl Transaction {
    pub fn operation(&self) -> Result<Operation, DecodeError> {
        Operation::decode(self.op, &self.payload)
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        e.u64(self.seq);
        codec::put_caller(&mut e, &self.caller);
        e.u8(self.op.tag()).bytes(&self.payload).f64(self.ts.0);
        e.finish()
    }

    pub fn checksum(&self) -> [u8; 32] {
        Sha256::digest(self.canonical_bytes()).into()
    }
}

/// Append-only, gapless sequence of transactions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LedgerLog {
    entries: Vec<Transaction>,
}

impl LedgerLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: Vec<Transaction>) -> Result<Self, LedgerError> {
        for (k, tx) in entries.iter().enumerate() {
            if tx.seq != k as u64 {
                return Err(LedgerError::OutOfOrder {
                    expected: k as u64,
                    got: tx.seq,
                });
            }
        }
        Ok(LedgerLog { entries })
    }

    pub fn entries(&self) -> &[Transaction] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&Transaction> {
        self.entries.last()
    }

    /// Orders a raw call. Payloads that do not decode to a well-formed
    /// operation are turned away without consuming a sequence number.
    pub fn append(
        &mut self,
        caller: Caller,
        op: OpKind,
        payload: Vec<u8>,
        ts: Timestamp,
    ) -> Result<u64, LedgerError> {
        ts.validate()
            .map_err(|e| LedgerError::InvalidOperation(e.to_string()))?;
        if let Operation::Init(cfg) = Operation::decode(op, &payload)? {
            cfg.validate()
                .map_err(|e| LedgerError::InvalidOperation(e.to_string()))?;
        }
        let seq = self.entries.len() as u64;
        self.entries.push(Transaction {
            seq,
            caller,
            op,
            payload,
            ts,
        });
        Ok(seq)
    }

    pub fn submit(
        &mut self,
        caller: Caller,
        op: &Operation,
        ts: Timestamp,
    ) -> Result<u64, LedgerError> {
        self.append(caller, op.kind(), op.payload(), ts)
    }
}

/// What a transaction did to a replica.
#[derive(Debug, Clone, PartialEq)]
pub enum Applied {
    Initialized,
    PairAccepted { new_sets: Vec<IntersectionSet> },
    ComparisonAccepted { completed_set: bool },
    Rejected(String),
}

#[derive(Debug, Clone)]
pub struct Replica {
    pub node_id: u32,
    applied_seq: Option<u64>,
    state: Option<ContractState>,
}

impl Replica {
    pub fn new(node_id: u32) -> Self {
        Replica {
            node_id,
            applied_seq: None,
            state: None,
        }
    }

    pub fn applied_seq(&self) -> Option<u64> {
        self.applied_seq
    }

    pub fn state(&self) -> Option<&ContractState> {
        self.state.as_ref()
    }

    pub fn into_state(self) -> Option<ContractState> {
        self.state
    }

    pub fn digest(&self) -> Option<StateDigest> {
        self.state.as_ref().map(state_digest)
    }

    pub fn apply(&mut self, tx: &Transaction) -> Result<Applied, LedgerError> {
        let expected = self.applied_seq.map_or(0, |s| s + 1);
        if tx.seq != expected {
            return Err(LedgerError::OutOfOrder {
                expected,
                got: tx.seq,
            });
        }
        let op = tx.operation()?;
        let Some(state) = self.state.as_mut() else {
            let Operation::Init(cfg) = op else {
                return Err(LedgerError::NotInitialized);
            };
            if tx.caller != Caller::Operator {
                return Err(LedgerError::InitRejected(ContractError::Unauthorized {
                    caller: tx.caller,
                    action: "initialize the contract",
                }));
            }
            let st = ContractState::init(cfg).map_err(LedgerError::InitRejected)?;
            self.state = Some(st);
            self.applied_seq = Some(tx.seq);
            return Ok(Applied::Initialized);
        };
        let outcome = match op {
            Operation::Init(_) => Err(ContractError::Duplicate("contract already initialized".into())),
            Operation::SubmitPair(pair) => state
                .submit_pair(tx.caller, pair)
                .map(|new_sets| Applied::PairAccepted { new_sets }),
            Operation::SubmitComparison(res) => state
                .submit_comparison(tx.caller, res)
                .map(|completed_set| Applied::ComparisonAccepted { completed_set }),
        };
        let applied = outcome.unwrap_or_else(|err| {
            let reason = err.to_string();
            state.record_rejection(tx.seq, tx.op.name(), reason.clone());
            Applied::Rejected(reason)
        });
        self.applied_seq = Some(tx.seq);
        Ok(applied)
    }
}

/// Folds every entry onto a fresh replica.
pub fn replay(entries: &[Transaction]) -> Result<ContractState, ReplayError> {
    let mut replica = Replica::new(0);
    for (index, tx) in entries.iter().enumerate() {
        replica
            .apply(tx)
            .map_err(|source| ReplayError { index, source })?;
    }
    replica.into_state().ok_or(ReplayError {
        index: 0,
        source: LedgerError::NotInitialized,
    })
}

impl fmt::Display for Caller {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Caller::Operator => f.write_str("operator"),
            Caller::Robot(r) => write!(f, "robot:{}", r.0),
            Caller::Cloud => f.write_str("cloud"),
        }
    }
}

impl FromStr for Caller {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "operator" => Ok(Caller::Operator),
            "cloud" => Ok(Caller::Cloud),
            _ => s
                .strip_prefix("robot:")
                .filter(|id| !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit()))
                .filter(|id| *id == "0" || !id.starts_with('0'))
                .and_then(|id| id.parse::<u32>().ok())
                .map(|id| Caller::Robot(RobotId(id)))
                .ok_or_else(|| format!("unknown caller {s:?}")),
        }
    }
}
