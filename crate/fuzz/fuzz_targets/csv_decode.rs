#![no_main]

use leace_core::io::{parse_csv, write_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = parse_csv(data) {
        let again = parse_csv(write_csv(&m).as_bytes()).expect("re-encoded csv must parse");
        assert_eq!(again.shape(), m.shape());
    }
});
