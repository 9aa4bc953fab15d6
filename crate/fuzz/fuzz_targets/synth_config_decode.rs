#![no_main]

use leace_core::synth::SyntheticConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = SyntheticConfig::from_json(data) {
        // keep resolution cheap; huge dims are a memory question, not a parser one
        let small = |v: usize| v <= 256;
        if small(cfg.d) && small(cfg.topics) && small(cfg.sources) && small(cfg.u_dim.unwrap_or(0)) {
            let _ = cfg.resolve();
        }
    }
});
