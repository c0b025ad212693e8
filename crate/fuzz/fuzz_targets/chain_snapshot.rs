#![no_main]

use libfuzzer_sys::fuzz_target;
use prime_oracle::tmcmc::{ChainSnapshot, TmcmcChain};

fuzz_target!(|data: &[u8]| {
    if let Ok(snap) = serde_json::from_slice::<ChainSnapshot>(data) {
        if let Ok(chain) = TmcmcChain::restore(&snap) {
            assert_eq!(chain.iteration(), snap.iteration);
        }
    }
});
