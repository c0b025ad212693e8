//! On-disk prime table cache.
//!
//! Layout, all integers little-endian `u64`:
//!
//! ```text
//! "PRIMTBL1" | limit | count | prime[0] .. prime[count-1]
//! ```

use std::fs;
use std::path::Path;

use super::sieve::{primes_up_to_with, PrimeTable, SieveConfig};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PRIMTBL1";
const HEADER_LEN: usize = 24;

pub fn encode_table(table: &PrimeTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * table.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&table.limit().to_le_bytes());
    out.extend_from_slice(&(table.len() as u64).to_le_bytes());
    for &p in table.primes() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

fn read_u64(bytes: &[u8], at: usize) -> u64 {
    let mut buf = [0u8; 8];
    buf.copy_from_slice(&bytes[at..at + 8]);
    u64::from_le_bytes(buf)
}

/// Decode a cache image. Rejects anything that is not a well-formed,
/// strictly increasing table starting at 2.
pub fn decode_table(bytes: &[u8]) -> Result<PrimeTable> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::parse(None, "prime table cache is truncated"));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::parse(None, "bad prime table magic"));
    }
    let limit = read_u64(bytes, 8);
    let count = read_u64(bytes, 16);
    let body = bytes.len() - HEADER_LEN;
    if !body.is_multiple_of(8) || (body / 8) as u64 != count {
        return Err(Error::parse(
            None,
            format!("prime table declares {count} entries but carries {body} bytes"),
        ));
    }
    let primes = (0..count as usize).map(|i| read_u64(bytes, HEADER_LEN + 8 * i)).collect();
    PrimeTable::from_parts(limit, primes).map_err(|e| Error::parse(None, e.to_string()))
}

/// Load a cached table if it exists and was built for exactly `limit`.
pub fn load_cached(path: &Path, limit: u64) -> Result<Option<PrimeTable>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    if bytes.len() >= 16 && &bytes[..8] == MAGIC && read_u64(&bytes, 8) != limit {
        return Ok(None);
    }
    let table = decode_table(&bytes)?;
    Ok((table.limit() == limit).then_some(table))
}

/// Sieve through the cache: reuse a matching file, otherwise sieve and store.
pub fn primes_up_to_cached(path: &Path, limit: u64, config: SieveConfig) -> Result<PrimeTable> {
    if let Some(t) = load_cached(path, limit)? {
        return Ok(t);
    }
    let table = primes_up_to_with(limit, config)?;
    fs::write(path, encode_table(&table))?;
    Ok(table)
}
