#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pairs) = conbound::files::parse_plan(text) {
            let _ = conbound::files::plan_to_dense(&pairs, 16);
        }
    }
});
