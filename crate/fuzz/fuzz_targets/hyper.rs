#![no_main]

use libfuzzer_sys::fuzz_target;
use prime_oracle::recursive::Hyper;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(h) = s.parse::<Hyper>() {
            assert_eq!(h.to_string().parse::<Hyper>().unwrap(), h);
        }
    }
});
