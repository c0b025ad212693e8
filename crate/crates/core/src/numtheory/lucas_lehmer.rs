//! Lucas–Lehmer test and Mersenne helpers.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::is_prime_u64;
use crate::error::{Error, Result};

/// Default ceiling on the exponent accepted by [`lucas_lehmer`].
pub const DEFAULT_LL_CEILING: u64 = 100_000;

/// Reduce `x` modulo `2^p - 1` without division.
fn reduce_mersenne(mut x: BigUint, p: u64, modulus: &BigUint) -> BigUint {
    while x.bits() > p {
        let hi = &x >> p;
        let lo = x & modulus;
        x = hi + lo;
    }
    if &x == modulus {
        BigUint::zero()
    } else {
        x
    }
}

/// True iff `2^p - 1` is prime, for an odd prime `p` up to the default ceiling.
pub fn lucas_lehmer(p: u64) -> Result<bool> {
    lucas_lehmer_with_ceiling(p, DEFAULT_LL_CEILING)
}

pub fn lucas_lehmer_with_ceiling(p: u64, ceiling: u64) -> Result<bool> {
    if p == 2 || !is_prime_u64(p) {
        return Err(Error::domain(format!("Lucas-Lehmer needs an odd prime exponent, got {p}")));
    }
    if p > ceiling {
        return Err(Error::Resource(format!(
            "exponent {p} exceeds the Lucas-Lehmer ceiling {ceiling}"
        )));
    }
    let modulus = (BigUint::one() << p) - BigUint::one();
    let two = BigUint::from(2u32);
    let mut s = BigUint::from(4u32);
    for _ in 0..p - 2 {
        let sq = reduce_mersenne(&s * &s, p, &modulus);
        // s^2 - 2 mod M, staying non-negative
        s = if sq >= two { sq - &two } else { sq + &modulus - &two };
    }
    Ok(s.is_zero())
}

/// Decimal digits of `2^p - 1`.
pub fn mersenne_digit_count(p: u64) -> u64 {
    assert!(p >= 1, "exponent must be positive");
    (p as f64 * std::f64::consts::LOG10_2).floor() as u64 + 1
}

/// Does some `q = 2mp + 1 < 2^bits` with `q ≡ ±1 (mod 8)` divide `2^p - 1`?
///
/// Returns the first such prime factor.
pub fn mersenne_trial_factor(p: u64, bits: u32) -> Option<u64> {
    let bits = bits.min(63);
    let bound = 1u64 << bits;
    let step = 2 * p;
    let mut q = step + 1;
    while q < bound {
        let r = q % 8;
        if (r == 1 || r == 7) && is_prime_u64(q) && super::miller_rabin::pow_mod(2, p, q) == 1 {
            return Some(q);
        }
        q = match q.checked_add(step) {
            Some(v) => v,
            None => break,
        };
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_exponents() {
        for p in [3u64, 5, 7, 13, 17, 19, 31, 61, 89, 107, 127, 521, 607] {
            assert!(lucas_lehmer(p).unwrap(), "{p}");
        }
        for p in [11u64, 23, 29, 37, 41, 43, 47, 53, 59, 67, 71, 73, 79, 83, 97] {
            assert!(!lucas_lehmer(p).unwrap(), "{p}");
        }
    }

    #[test]
    fn agrees_with_factorization_up_to_61() {
        for p in (3u64..=61).filter(|&p| is_prime_u64(p)) {
            let m = (1u128 << p) - 1;
            // Mersenne factors have the form 2kp+1; this keeps the oracle fast.
            let mut prime = true;
            let mut q = 2 * p as u128 + 1;
            while q * q <= m {
                if m.is_multiple_of(q) {
                    prime = false;
                    break;
                }
                q += 2 * p as u128;
            }
            assert_eq!(lucas_lehmer(p).unwrap(), prime, "{p}");
        }
    }

    #[test]
    fn domain_and_ceiling_errors() {
        assert!(matches!(lucas_lehmer(2), Err(Error::Domain(_))));
        assert!(matches!(lucas_lehmer(9), Err(Error::Domain(_))));
        assert!(matches!(lucas_lehmer(100_003), Err(Error::Resource(_))));
        assert!(matches!(lucas_lehmer_with_ceiling(31, 29), Err(Error::Resource(_))));
    }

    #[test]
    fn digit_counts() {
        assert_eq!(mersenne_digit_count(7), 3);
        assert_eq!(mersenne_digit_count(136_279_841), 41_024_320);
        assert_eq!(mersenne_digit_count(140_000_053), 42_144_216);
        assert_eq!(mersenne_digit_count(805_032_733), 242_339_001);
        // cross-check against exact big integers for small p
        for p in 1..400u64 {
            let m = (BigUint::one() << p) - BigUint::one();
            assert_eq!(mersenne_digit_count(p), m.to_string().len() as u64, "{p}");
        }
    }

    #[test]
    fn trial_factor_finds_small_divisors() {
        assert_eq!(mersenne_trial_factor(11, 10), Some(23));
        assert_eq!(mersenne_trial_factor(29, 12), Some(233));
        assert_eq!(mersenne_trial_factor(31, 20), None);
    }
}
