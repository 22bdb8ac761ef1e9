//! The `byzvision` command line.
//!
//! Exit status is 0 on success, 1 when a run fails or a ledger does not
//! verify, and 2 for usage and configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::ledger::{replay, state_digest, LedgerLog, LogError};
use crate::report::{RunReport, RunSummary, SUMMARY_FILE};
use crate::sim::{run_experiment, SimConfig, SimError};

#[derive(Debug, Parser)]
#[command(name = "byzvision", version, about = "Vision-based byzantine robot detection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write its data files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a ledger and check it against a co-located report.json.
    Replay {
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Summarize a run directory.
    Report { dir: PathBuf },
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

/// Parses arguments, runs the command and returns the exit status.
pub fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    ExitCode::from(execute(&cli.command))
}

pub fn execute(command: &Command) -> u8 {
    match command {
        Command::Run { config, seed, out } => cmd_run(config, *seed, out),
        Command::Replay { ledger } => cmd_replay(ledger),
        Command::Report { dir } => cmd_report(dir),
    }
}

fn cmd_run(config: &Path, seed: Option<u64>, out: &Path) -> u8 {
    let mut cfg = match SimConfig::load(config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e @ SimError::Config(_)) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("error: run failed: {e}");
            return EXIT_FAILURE;
        }
    };
    if let Err(e) = report.write_dir(out) {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    let s = &report.summary;
    println!(
        "{} sets emitted, {} completed, {} ledger entries",
        s.emitted_sets, s.completed_sets, s.ledger_entries
    );
    println!("final digest {}", s.final_digest);
    println!("wrote {}", out.display());
    EXIT_OK
}

fn cmd_replay(ledger: &Path) -> u8 {
    let text = match std::fs::read_to_string(ledger) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", ledger.display());
            return EXIT_USAGE;
        }
    };
    let read = match LedgerLog::parse(&text) {
        Ok(r) => r,
        Err(LogError::Corrupt { index, reason }) => {
            eprintln!("error: corrupt ledger at entry {index}: {reason}");
            return EXIT_FAILURE;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    if read.truncated_tail {
        println!("note: dropped an incomplete final line");
    }
    let state = match replay(read.log.entries()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: replay failed: {e}");
            return EXIT_FAILURE;
        }
    };
    let digest = state_digest(&state);
    let entries = read.log.len() as u64;
    println!("replayed {entries} entries");
    println!("final digest {digest}");

    let summary_path = ledger.with_file_name(SUMMARY_FILE);
    if !summary_path.exists() {
        return EXIT_OK;
    }
    let summary: RunSummary = match std::fs::read_to_string(&summary_path)
        .map_err(|e| e.to_string())
        .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
    {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", summary_path.display());
            return EXIT_FAILURE;
        }
    };
    if entries < summary.ledger_entries {
        println!(
            "log holds a prefix ({entries} of {} entries); digest above is the prefix state",
            summary.ledger_entries
        );
        return EXIT_OK;
    }
    if entries == summary.ledger_entries && digest == summary.final_digest {
        println!("matches {}", summary_path.display());
        EXIT_OK
    } else {
        eprintln!(
            "error: digest mismatch with {} (expected {} after {} entries)",
            summary_path.display(),
            summary.final_digest,
            summary.ledger_entries
        );
        EXIT_FAILURE
    }
}

fn cmd_report(dir: &Path) -> u8 {
    let report = match RunReport::read_dir(dir) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let s = &report.summary;
    println!("seed {}", s.seed);
    for v in &report.verdicts {
        let verdict = if v.flagged { "FLAGGED" } else { "ok" };
        let when = v
            .flag_time
            .map(|t| format!(" (at t={t})"))
            .unwrap_or_default();
        println!("robot {}: {verdict}{when}, score {}", v.robot, v.score);
    }
    println!("threshold {}", s.threshold);
    println!(
        "intersections {} ({} completed)",
        report.intersections.len(),
        s.completed_sets
    );
    EXIT_OK
}
