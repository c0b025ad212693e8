#![no_main]

use libfuzzer_sys::fuzz_target;
use prime_oracle::pipeline::verify_str;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let r = verify_str(&text);
    assert_eq!(r.total(), r.lines.len());
});
