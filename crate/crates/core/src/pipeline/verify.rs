//! Primality verdicts for a file of integers, one per line.

use std::path::Path;

use crate::error::Result;
use crate::numtheory::is_prime_u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Prime(u64),
    Composite(u64),
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineVerdict {
    /// 1-based line number in the input.
    pub line: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub lines: Vec<LineVerdict>,
    pub primes: usize,
    pub composites: usize,
    pub invalid: usize,
}

impl VerifyReport {
    pub fn total(&self) -> usize {
        self.primes + self.composites + self.invalid
    }

    pub fn all_prime(&self) -> bool {
        self.composites == 0 && self.invalid == 0
    }
}

/// Parse one line. `None` for blank lines and `#` comments.
pub fn parse_line(line: &str) -> Option<std::result::Result<u64, String>> {
    let t = line.trim();
    if t.is_empty() || t.starts_with('#') {
        return None;
    }
    Some(t.parse::<u64>().map_err(|e| format!("{t:?}: {e}")))
}

/// Verdict for every non-blank line; malformed lines are reported, not fatal.
pub fn verify_str(text: &str) -> VerifyReport {
    let mut report = VerifyReport::default();
    for (i, line) in text.lines().enumerate() {
        let verdict = match parse_line(line) {
            None => continue,
            Some(Ok(n)) if is_prime_u64(n) => {
                report.primes += 1;
                Verdict::Prime(n)
            }
            Some(Ok(n)) => {
                report.composites += 1;
                Verdict::Composite(n)
            }
            Some(Err(msg)) => {
                report.invalid += 1;
                Verdict::Invalid(msg)
            }
        };
        report.lines.push(LineVerdict { line: i + 1, verdict });
    }
    report
}

pub fn verify_file(path: &Path) -> Result<VerifyReport> {
    let bytes = std::fs::read(path)?;
    Ok(verify_str(&String::from_utf8_lossy(&bytes)))
}
