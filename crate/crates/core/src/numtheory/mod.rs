//! Exact primality and prime tables.

pub mod cache;
mod lucas_lehmer;
mod miller_rabin;
mod sieve;

pub use lucas_lehmer::{
    lucas_lehmer, lucas_lehmer_with_ceiling, mersenne_digit_count, mersenne_trial_factor,
    DEFAULT_LL_CEILING,
};
pub use miller_rabin::is_prime_u64;
pub use sieve::{primes_up_to, primes_up_to_with, PrimeTable, SieveConfig, MAX_SIEVE_LIMIT};
