//! Bayesian prediction of prime locations from a non-homogeneous Poisson
//! model of the primes, with exact primality back ends and a Monte Carlo
//! hunt for candidate primes.

// `!(a > b)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod nonrecursive;
pub mod numtheory;
pub mod recursive;
pub mod nhpp;
pub mod pipeline;
pub mod specialfn;
pub mod tmcmc;

pub use error::{Error, Result};
