#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Must never panic; errors are fine.
        let _ = conbound::netgraph::parse_network(text);
    }
});
