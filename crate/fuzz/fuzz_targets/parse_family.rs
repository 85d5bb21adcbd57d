#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = io::parse_family(data) {
        let back = io::parse_family(io::family_to_json(&f).expect("serializable").as_bytes()).expect("round trip");
        assert_eq!(back, f);
    }
});
