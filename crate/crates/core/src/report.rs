//! Run outputs and the files they are written to.
//!
//! | file                 | contents                                           |
//! |----------------------|----------------------------------------------------|
//! | `scores.csv`         | `time,robot,score,threshold`, one row per robot at every completed set |
//! | `trajectories.csv`   | `time,robot,x,y,theta` of every submitted image    |
//! | `intersections.json` | array of [`IntersectionRow`]                       |
//! | `verdicts.json`      | array of [`VerdictRow`]                            |
//! | `ledger.log`         | the ordered transaction log                        |
//! | `report.json`        | [`RunSummary`]                                     |

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{LedgerLog, LogError, StateDigest};
use crate::sim::SimConfig;
use crate::types::ImageDigest;

pub const SCORES_FILE: &str = "scores.csv";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const INTERSECTIONS_FILE: &str = "intersections.json";
pub const VERDICTS_FILE: &str = "verdicts.json";
pub const LEDGER_FILE: &str = "ledger.log";
pub const SUMMARY_FILE: &str = "report.json";

pub const ALL_FILES: [&str; 6] = [
    SCORES_FILE,
    INTERSECTIONS_FILE,
    VERDICTS_FILE,
    TRAJECTORIES_FILE,
    LEDGER_FILE,
    SUMMARY_FILE,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub time: f64,
    pub robot: u32,
    pub score: u64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time: f64,
    pub robot: u32,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionRow {
    pub set_id: u64,
    /// When the set was published.
    pub time: f64,
    pub x: f64,
    pub y: f64,
    /// Circular mean of the member headings.
    pub heading: f64,
    pub robots: Vec<u32>,
    pub digests: Vec<ImageDigest>,
    pub completed_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub robot: u32,
    pub flagged: bool,
    pub flag_time: Option<f64>,
    pub score: u64,
}

/// The contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub config: SimConfig,
    pub final_digest: StateDigest,
    pub ledger_entries: u64,
    pub emitted_sets: u64,
    pub completed_sets: u64,
    pub final_scores: Vec<u64>,
    pub threshold: f64,
    pub flags: Vec<bool>,
    /// Images without a pose inside the staleness bound.
    pub dropped_images: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub summary: RunSummary,
    pub timeline: Vec<ScoreRow>,
    pub intersections: Vec<IntersectionRow>,
    pub verdicts: Vec<VerdictRow>,
    pub trajectories: Vec<TrajectoryRow>,
    pub ledger: LedgerLog,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Ledger { path: PathBuf, source: LogError },
}

fn csv_text<T: Serialize>(rows: &[T], header: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).expect("writing to memory");
    }
    for r in rows {
        w.serialize(r).expect("rows are flat records");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv is utf-8")
}

fn json_text<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

impl RunReport {
    /// File name and contents of every output, in a fixed order.
    pub fn files(&self) -> Vec<(&'static str, String)> {
        vec![
            (
                SCORES_FILE,
                csv_text(&self.timeline, &["time", "robot", "score", "threshold"]),
            ),
            (INTERSECTIONS_FILE, json_text(&self.intersections)),
            (VERDICTS_FILE, json_text(&self.verdicts)),
            (
                TRAJECTORIES_FILE,
                csv_text(&self.trajectories, &["time", "robot", "x", "y", "theta"]),
            ),
            (LEDGER_FILE, self.ledger.to_text()),
            (SUMMARY_FILE, json_text(&self.summary)),
        ]
    }

    pub fn write_dir(&self, dir: &Path) -> Result<(), ReportError> {
        fs::create_dir_all(dir).map_err(|source| ReportError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (name, text) in self.files() {
            let path = dir.join(name);
            fs::write(&path, text).map_err(|source| ReportError::Io { path, source })?;
        }
        Ok(())
    }

    pub fn read_dir(dir: &Path) -> Result<Self, ReportError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path)
                .map(|text| (path.clone(), text))
                .map_err(|source| ReportError::Io { path, source })
        };
        let parse_err = |path: &Path, e: &dyn std::fmt::Display| ReportError::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        let json = |name: &str| -> Result<serde_json::Value, ReportError> {
            let (path, text) = read(name)?;
            serde_json::from_str(&text).map_err(|e| parse_err(&path, &e))
        };

        let summary: RunSummary = serde_json::from_value(json(SUMMARY_FILE)?)
            .map_err(|e| parse_err(&dir.join(SUMMARY_FILE), &e))?;
        let intersections: Vec<IntersectionRow> = serde_json::from_value(json(INTERSECTIONS_FILE)?)
            .map_err(|e| parse_err(&dir.join(INTERSECTIONS_FILE), &e))?;
        let verdicts: Vec<VerdictRow> = serde_json::from_value(json(VERDICTS_FILE)?)
            .map_err(|e| parse_err(&dir.join(VERDICTS_FILE), &e))?;

        let (path, text) = read(SCORES_FILE)?;
        let timeline = parse_csv(&text).map_err(|e| parse_err(&path, &e))?;
        let (path, text) = read(TRAJECTORIES_FILE)?;
        let trajectories = parse_csv(&text).map_err(|e| parse_err(&path, &e))?;

        let (path, text) = read(LEDGER_FILE)?;
        let ledger = LedgerLog::parse(&text)
            .map_err(|source| ReportError::Ledger { path, source })?
            .log;
        Ok(RunReport {
            summary,
            timeline,
            intersections,
            verdicts,
            trajectories,
            ledger,
        })
    }
}

fn parse_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}
