//! Newline-delimited JSON ledger files.
//!
//! One transaction per line:
//!
//! ```text
//! {"seq":0,"caller":"operator","op":"init","ts":0.0,"payload":"<base64>","sha256":"<hex>"}
//! ```
//!
//! `payload` is the canonical binary encoding of the operation arguments in
//! standard padded base64. `sha256` covers the canonical bytes of the whole
//! transaction, so any edit to a line is caught when the file is read back.

use std::io::{self, Write};

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LedgerLog, OpKind, Transaction};
use crate::types::Timestamp;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("entry {index}: {reason}")]
    Corrupt { index: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    seq: u64,
    caller: String,
    op: OpKind,
    ts: f64,
    payload: String,
    sha256: String,
}

impl Transaction {
    /// Serializes to one log line, without the trailing newline.
    pub fn to_log_line(&self) -> String {
        let line = Line {
            seq: self.seq,
            caller: self.caller.to_string(),
            op: self.op,
            ts: self.ts.0,
            payload: STANDARD.encode(&self.payload),
            sha256: hex::encode(self.checksum()),
        };
        serde_json::to_string(&line).expect("plain struct serializes")
    }

    pub fn from_log_line(text: &str) -> Result<Self, String> {
        let line: Line = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let tx = Transaction {
            seq: line.seq,
            caller: line.caller.parse()?,
            op: line.op,
            payload: STANDARD.decode(&line.payload).map_err(|e| e.to_string())?,
            ts: Timestamp(line.ts),
        };
        if hex::encode(tx.checksum()) != line.sha256 {
            return Err("checksum mismatch".into());
        }
        tx.operation().map_err(|e| e.to_string())?;
        if tx.to_log_line() != text {
            return Err("line is not in canonical form".into());
        }
        Ok(tx)
    }
}

/// A parsed ledger file.
#[derive(Debug)]
pub struct LogRead {
    pub log: LedgerLog,
    /// The file ended in an incomplete line that was dropped.
    pub truncated_tail: bool,
}

impl LedgerLog {
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for tx in self.entries() {
            writeln!(w, "{}", tx.to_log_line())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        String::from_utf8(out).expect("log lines are ascii")
    }

    /// Parses a ledger file. A final line without a newline that ends
    /// mid-record is treated as a cut-off write and dropped; any other bad
    /// line is an error naming its entry index.
    pub fn parse(text: &str) -> Result<LogRead, LogError> {
        let mut entries = Vec::new();
        let mut truncated_tail = false;
        let mut rest = text;
        while !rest.is_empty() {
            let index = entries.len();
            let (line, terminated) = match rest.find('\n') {
                Some(pos) => {
                    let line = &rest[..pos];
                    rest = &rest[pos + 1..];
                    (line, true)
                }
                None => {
                    let line = rest;
                    rest = "";
                    (line, false)
                }
            };
            match Transaction::from_log_line(line) {
                Ok(tx) => {
                    if tx.seq != index as u64 {
                        return Err(LogError::Corrupt {
                            index,
                            reason: format!("sequence {} out of place", tx.seq),
                        });
                    }
                    entries.push(tx);
                }
                Err(_) if !terminated && is_cut_off(line) => truncated_tail = true,
                Err(reason) => return Err(LogError::Corrupt { index, reason }),
            }
        }
        let log = LedgerLog::from_entries(entries).expect("sequence checked per line");
        Ok(LogRead {
            log,
            truncated_tail,
        })
    }
}
/// The text is the start of a JSON document that was never finished.
fn is_cut_off(line: &str) -> bool {
    matches!(serde_json::from_str::<serde_json::Value>(line), Err(e) if e.is_eof())
}
