#![no_main]

use libfuzzer_sys::fuzz_target;
use prime_oracle::pipeline::CandidateRecord;

fuzz_target!(|data: &[u8]| {
    if let Ok(line) = std::str::from_utf8(data) {
        if let Ok(rec) = CandidateRecord::from_json_line(line) {
            let again = CandidateRecord::from_json_line(&rec.to_json_line()).unwrap();
            assert_eq!(rec, again);
        }
    }
});
