#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(w) = io::parse_trace(data) {
        let back = io::parse_trace(io::trace_to_json(&w).expect("serializable").as_bytes()).expect("round trip");
        assert_eq!(back, w);
    }
});
