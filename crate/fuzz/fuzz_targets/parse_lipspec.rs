#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = io::parse_lipspec(data) {
        let back = io::parse_lipspec(io::lipspec_to_json(&spec).expect("serializable").as_bytes()).expect("round trip");
        assert_eq!(back.tower(), spec.tower());
        assert_eq!(back.beta(), spec.beta());
    }
});
