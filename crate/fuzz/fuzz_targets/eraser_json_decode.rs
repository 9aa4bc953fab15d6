#![no_main]

use leace_core::LeaceEraser;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(e) = LeaceEraser::from_bytes(data) {
        let again = LeaceEraser::from_bytes(&e.to_bytes()).expect("serialized eraser must load");
        assert_eq!(again.dim(), e.dim());
    }
});
