#![no_main]

use leace_core::io::{parse_labels, write_labels};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(labels) = parse_labels(data) {
        let again = parse_labels(write_labels(&labels).as_bytes()).expect("labels round-trip");
        assert_eq!(again.codes(), labels.codes());
    }
});
