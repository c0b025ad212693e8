//! Candidate records and their append-only JSON-lines store.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::{is_prime_u64, mersenne_digit_count};
use crate::tmcmc::TargetKind;

use super::FORMAT_HEADER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CandidateKind {
    GeneralPrime,
    MersenneExponent,
}

/// One prime found by a hunt, with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    pub value: u64,
    pub kind: CandidateKind,
    pub p0: u64,
    pub k: u64,
    pub seed: u64,
    pub iteration_found: u64,
    pub target_kind: TargetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digit_count: Option<u64>,
}

impl CandidateRecord {
    /// Check primality, `value > p0`, and the digit count for exponents.
    pub fn validate(&self) -> Result<()> {
        if self.value <= self.p0 {
            return Err(Error::Consistency(format!("value {} does not exceed p0 = {}", self.value, self.p0)));
        }
        if !is_prime_u64(self.value) {
            return Err(Error::Consistency(format!("value {} is not prime", self.value)));
        }
        let want = match self.kind {
            CandidateKind::MersenneExponent => Some(mersenne_digit_count(self.value)),
            CandidateKind::GeneralPrime => None,
        };
        if self.digit_count != want {
            return Err(Error::Consistency(format!(
                "digit count {:?} for {} should be {:?}",
                self.digit_count, self.value, want
            )));
        }
        Ok(())
    }

    /// Parse and validate one JSON line.
    pub fn from_json_line(line: &str) -> Result<Self> {
        let rec: CandidateRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(None, e.to_string()))?;
        rec.validate()?;
        Ok(rec)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

/// Append-only store deduplicated on `(value, kind)`.
///
/// Backed by a file when opened with a path; every record is flushed as it
/// is appended so a crash loses at most the line in flight.
#[derive(Debug)]
pub struct ResultStore {
    path: Option<PathBuf>,
    writer: Option<BufWriter<File>>,
    seen: HashSet<(u64, CandidateKind)>,
    records: Vec<CandidateRecord>,
}

impl ResultStore {
    pub fn in_memory() -> Self {
        Self { path: None, writer: None, seen: HashSet::new(), records: Vec::new() }
    }

    /// Open or create `path`, re-verifying every stored record.
    pub fn open(path: &Path) -> Result<Self> {
        let records = if path.exists() { load_records(path)? } else { Vec::new() };
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut writer = BufWriter::new(file);
        if fresh {
            writeln!(writer, "{FORMAT_HEADER}")?;
            writer.flush()?;
        }
        let seen = records.iter().map(|r| (r.value, r.kind)).collect();
        Ok(Self { path: Some(path.to_path_buf()), writer: Some(writer), seen, records })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn contains(&self, value: u64, kind: CandidateKind) -> bool {
        self.seen.contains(&(value, kind))
    }

    pub fn records(&self) -> &[CandidateRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Largest stored value of the given kind.
    pub fn max_value(&self, kind: CandidateKind) -> Option<u64> {
        self.records.iter().filter(|r| r.kind == kind).map(|r| r.value).max()
    }

    /// Append `rec` unless an equal `(value, kind)` is already stored.
    /// Returns whether it was new.
    pub fn append(&mut self, rec: CandidateRecord) -> Result<bool> {
        rec.validate()?;
        if !self.seen.insert((rec.value, rec.kind)) {
            return Ok(false);
        }
        if let Some(w) = self.writer.as_mut() {
            writeln!(w, "{}", rec.to_json_line())?;
            w.flush()?;
        }
        self.records.push(rec);
        Ok(true)
    }
}

/// Read a JSON-lines record file, skipping blank and `#` lines.
pub fn load_records(path: &Path) -> Result<Vec<CandidateRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let rec = CandidateRecord::from_json_line(t).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::parse(Some(i + 1), msg),
            Error::Consistency(msg) => Error::Consistency(format!("line {}: {msg}", i + 1)),
            other => other,
        })?;
        out.push(rec);
    }
    Ok(out)
}
