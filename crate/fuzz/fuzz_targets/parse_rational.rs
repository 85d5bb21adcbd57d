#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(r) = io::parse_rational(text) {
            assert_eq!(io::parse_rational(&r.to_string()).expect("round trip"), r);
        }
    }
});
