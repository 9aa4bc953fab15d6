#![no_main]

use leace_core::io::{parse_pairs, write_pairs};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(pairs) = parse_pairs(data) {
        assert_eq!(parse_pairs(write_pairs(&pairs).as_bytes()).unwrap(), pairs);
    }
});
