#![no_main]

use libfuzzer_sys::fuzz_target;
use prime_oracle::numtheory::cache::{decode_table, encode_table};

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = decode_table(data) {
        assert_eq!(encode_table(&table), data);
    }
});
