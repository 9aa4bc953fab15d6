#![no_main]

use leace_core::io::{parse_embx, parse_embx_header, write_embx};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_embx_header(data);
    if let Ok(m) = parse_embx(data) {
        // anything that decodes must re-encode to the same bytes
        assert_eq!(write_embx(&m), data);
    }
});
