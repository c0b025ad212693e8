//! Segmented sieve of Eratosthenes.

use crate::error::{Error, Result};

/// Largest limit accepted by [`primes_up_to`].
pub const MAX_SIEVE_LIMIT: u64 = 1_000_000_000;

/// Ascending table of every prime up to `limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    /// Wrap an already-validated prime list. Checks ordering, not primality.
    pub(crate) fn from_parts(limit: u64, primes: Vec<u64>) -> Result<Self> {
        if primes.first().is_some_and(|&p| p != 2) {
            return Err(Error::Consistency("prime table must start at 2".into()));
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Consistency("prime table is not strictly increasing".into()));
        }
        if primes.last().is_some_and(|&p| p > limit) {
            return Err(Error::Consistency("prime table exceeds its limit".into()));
        }
        Ok(Self { limit, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Number of primes `<= x`.
    pub fn count_up_to(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    /// Smallest tabulated prime `> x`.
    pub fn next_after(&self, x: u64) -> Option<u64> {
        self.primes.get(self.primes.partition_point(|&p| p <= x)).copied()
    }

    pub fn into_primes(self) -> Vec<u64> {
        self.primes
    }
}

/// Sieve tuning.
#[derive(Debug, Clone, Copy)]
pub struct SieveConfig {
    /// Bytes of working memory per segment (one byte per odd candidate).
    pub segment_bytes: usize,
    pub max_limit: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_bytes: 1 << 18,
            max_limit: MAX_SIEVE_LIMIT,
        }
    }
}

/// Every prime `<= limit`.
pub fn primes_up_to(limit: u64) -> Result<PrimeTable> {
    primes_up_to_with(limit, SieveConfig::default())
}

pub fn primes_up_to_with(limit: u64, config: SieveConfig) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::domain(format!("no primes below {limit}")));
    }
    if limit > config.max_limit {
        return Err(Error::Resource(format!(
            "sieve limit {limit} exceeds the configured maximum {}",
            config.max_limit
        )));
    }
    let seg_len = config.segment_bytes.max(64) as u64;

    // Base primes up to sqrt(limit) with a plain sieve.
    let root = (limit as f64).sqrt() as u64 + 1;
    let mut small = vec![true; root as usize + 1];
    small[0] = false;
    if root >= 1 {
        small[1] = false;
    }
    let mut i = 2usize;
    while i * i <= root as usize {
        if small[i] {
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    let base: Vec<u64> = (3..=root).filter(|&n| small[n as usize]).collect();

    // Prime counting estimate keeps reallocations down.
    let lf = limit as f64;
    let estimate = (lf / lf.ln() * 1.2) as usize + 16;
    let mut primes = Vec::with_capacity(estimate);
    primes.push(2);

    // Segments over odd numbers: index j represents lo + 2j.
    let mut seg = vec![true; seg_len as usize];
    let mut lo = 3u64;
    while lo <= limit {
        let hi = (lo + 2 * seg_len - 2).min(if limit.is_multiple_of(2) { limit - 1 } else { limit });
        if hi < lo {
            break;
        }
        let n = ((hi - lo) / 2 + 1) as usize;
        seg[..n].fill(true);
        for &p in &base {
            let pp = p * p;
            if pp > hi {
                break;
            }
            // first odd multiple of p >= max(lo, p*p)
            let mut start = if pp >= lo { pp } else { lo.div_ceil(p) * p };
            if start % 2 == 0 {
                start += p;
            }
            let mut j = ((start - lo) / 2) as usize;
            while j < n {
                seg[j] = false;
                j += p as usize;
            }
        }
        primes.extend(
            seg[..n]
                .iter()
                .enumerate()
                .filter(|(_, &keep)| keep)
                .map(|(j, _)| lo + 2 * j as u64),
        );
        lo = hi + 2;
    }
    Ok(PrimeTable { limit, primes })
}
