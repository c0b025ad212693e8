#![no_main]

use libfuzzer_sys::fuzz_target;
use prime_oracle::specialfn::ErrorBoundModel;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(m) = s.parse::<ErrorBoundModel>() {
            assert_eq!(m.to_string().parse::<ErrorBoundModel>().unwrap(), m);
        }
    }
});
