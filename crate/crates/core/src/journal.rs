//! Append-only JSONL journal of evaluations.
//!
//! Line 1 is a header object with `"kind":"header"`; every further line is an
//! `"kind":"eval"` object holding one [`EvaluationRecord`] and its sequence
//! number. Each append is flushed and synced before returning, so a killed
//! run loses at most a partially written last line.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::objective::EvaluationRecord;

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("journal not found: {0}")]
    NotFound(PathBuf),
    #[error("journal already exists: {0}")]
    Exists(PathBuf),
    #[error("journal I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt journal header: {0}")]
    Header(String),
    #[error("corrupt journal record on line {line}: {reason}")]
    Record { line: usize, reason: String },
    #[error("space digest mismatch: journal has {expected}, record uses {found}")]
    DigestMismatch { expected: String, found: String },
}

/// Run metadata stored on the first line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalHeader {
    pub run_id: String,
    pub space_digest: String,
    pub method: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(default)]
    pub params: Value,
    /// Unix seconds; omitted in deterministic runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Header(JournalHeader),
    Eval(JournalEntry),
}

/// One journaled evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalEntry {
    pub seq: u64,
    #[serde(flatten)]
    pub record: EvaluationRecord,
}

/// A journal read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RunJournal {
    pub path: PathBuf,
    pub header: JournalHeader,
    pub records: Vec<JournalEntry>,
    /// A trailing partial line was dropped.
    pub truncated: bool,
    complete_len: u64,
}

impl RunJournal {
    /// Records by `(canonical_key, seed)`; later records replace earlier ones.
    pub fn cache(&self) -> HashMap<(String, u64), EvaluationRecord> {
        self.records
            .iter()
            .map(|e| {
                (
                    (e.record.canonical_key.clone(), e.record.seed),
                    e.record.clone(),
                )
            })
            .collect()
    }

    pub fn ok_records(&self) -> Vec<EvaluationRecord> {
        self.records
            .iter()
            .filter(|e| e.record.is_ok())
            .map(|e| e.record.clone())
            .collect()
    }

    /// Journal content with wall-clock fields removed, for reproducibility checks.
    pub fn content(&self) -> Vec<Value> {
        let mut header = self.header.clone();
        header.created_at = None;
        let mut out = vec![serde_json::to_value(Line::Header(header)).expect("header serializes")];
        for e in &self.records {
            let mut entry = e.clone();
            entry.record.wall_seconds = 0.0;
            entry.record.metrics.retain(|k, _| !k.ends_with("_seconds"));
            out.push(serde_json::to_value(Line::Eval(entry)).expect("record serializes"));
        }
        out
    }
}

/// Reads a journal. A trailing line without a newline is dropped and flagged.
pub fn load(path: impl AsRef<Path>) -> Result<RunJournal, JournalError> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => JournalError::NotFound(path.to_path_buf()),
        _ => JournalError::Io(e),
    })?;
    let mut text = String::new();
    file.read_to_string(&mut text)?;
    parse(path, &text)
}

fn parse(path: &Path, text: &str) -> Result<RunJournal, JournalError> {
    let (complete, tail) = match text.rfind('\n') {
        Some(i) => (&text[..=i], &text[i + 1..]),
        None => ("", text),
    };
    let truncated = !tail.trim().is_empty();
    if truncated {
        log::warn!(
            "{}: dropping partial trailing line ({} bytes)",
            path.display(),
            tail.len()
        );
    }
    let mut lines = complete
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let header = match lines.next() {
        Some((_, first)) => match serde_json::from_str::<Line>(first) {
            Ok(Line::Header(h)) => h,
            Ok(Line::Eval(_)) => {
                return Err(JournalError::Header("first line is not a header".into()))
            }
            Err(e) => return Err(JournalError::Header(e.to_string())),
        },
        None => return Err(JournalError::Header("journal is empty".into())),
    };
    let mut records = Vec::new();
    for (i, line) in lines {
        match serde_json::from_str::<Line>(line) {
            Ok(Line::Eval(entry)) => records.push(entry),
            Ok(Line::Header(_)) => {
                return Err(JournalError::Record {
                    line: i + 1,
                    reason: "unexpected second header".into(),
                })
            }
            Err(e) => {
                return Err(JournalError::Record {
                    line: i + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(RunJournal {
        path: path.to_path_buf(),
        header,
        records,
        truncated,
        complete_len: complete.len() as u64,
    })
}

/// The single appender for one journal file.
#[derive(Debug)]
pub struct JournalWriter {
    file: File,
    path: PathBuf,
    header: JournalHeader,
    next_seq: u64,
}

impl JournalWriter {
    /// Starts a new journal; refuses to overwrite an existing file.
    pub fn create(path: impl AsRef<Path>, header: JournalHeader) -> Result<Self, JournalError> {
        let path = path.as_ref();
        let mut file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(path)
            .map_err(|e| match e.kind() {
                io::ErrorKind::AlreadyExists => JournalError::Exists(path.to_path_buf()),
                _ => JournalError::Io(e),
            })?;
        let line = serde_json::to_string(&Line::Header(header.clone())).expect("header serializes");
        writeln!(file, "{line}")?;
        file.sync_all()?;
        Ok(JournalWriter {
            file,
            path: path.to_path_buf(),
            header,
            next_seq: 0,
        })
    }

    /// Reopens an existing journal for appending.
    ///
    /// A partial trailing line left by a crash is cut off first so new
    /// records start on a fresh line; complete lines are never touched.
    pub fn resume(path: impl AsRef<Path>) -> Result<(Self, RunJournal), JournalError> {
        let loaded = load(path.as_ref())?;
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .open(&loaded.path)?;
        if loaded.truncated {
            file.set_len(loaded.complete_len)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        let next_seq = loaded.records.last().map_or(0, |e| e.seq + 1);
        let writer = JournalWriter {
            file,
            path: loaded.path.clone(),
            header: loaded.header.clone(),
            next_seq,
        };
        Ok((writer, loaded))
    }

    pub fn header(&self) -> &JournalHeader {
        &self.header
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends and syncs one record, returning its sequence number.
    pub fn append(
        &mut self,
        space_digest: &str,
        record: &EvaluationRecord,
    ) -> Result<u64, JournalError> {
        if space_digest != self.header.space_digest {
            return Err(JournalError::DigestMismatch {
                expected: self.header.space_digest.clone(),
                found: space_digest.to_string(),
            });
        }
        let seq = self.next_seq;
        let entry = JournalEntry {
            seq,
            record: record.clone(),
        };
        let line = serde_json::to_string(&Line::Eval(entry)).expect("record serializes");
        writeln!(self.file, "{line}")?;
        self.file.flush()?;
        self.file.sync_data()?;
        self.next_seq += 1;
        Ok(seq)
    }
}

impl JournalHeader {
    /// Header whose `run_id` is derived from everything that determines the run's content.
    pub fn new(
        space_digest: &str,
        method: &str,
        seed: u64,
        objective: Option<String>,
        params: Value,
    ) -> Self {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(format!("{space_digest}|{method}|{seed}|"));
        h.update(objective.as_deref().unwrap_or(""));
        h.update("|");
        h.update(params.to_string());
        JournalHeader {
            run_id: hex::encode(h.finalize())[..16].to_string(),
            space_digest: space_digest.to_string(),
            method: method.to_string(),
            seed,
            objective,
            params,
            created_at: None,
        }
    }
}

/// Reads the header line only.
pub fn read_header(path: impl AsRef<Path>) -> Result<JournalHeader, JournalError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => JournalError::NotFound(path.to_path_buf()),
        _ => JournalError::Io(e),
    })?;
    let mut first = String::new();
    BufReader::new(file).read_line(&mut first)?;
    match serde_json::from_str::<Line>(first.trim_end()) {
        Ok(Line::Header(h)) => Ok(h),
        Ok(Line::Eval(_)) => Err(JournalError::Header("first line is not a header".into())),
        Err(e) => Err(JournalError::Header(e.to_string())),
    }
}
