#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = io::parse_certificate(data) {
        assert_eq!(c.verified, c.recheck());
        let _ = io::certificate_to_json(&c);
    }
});
