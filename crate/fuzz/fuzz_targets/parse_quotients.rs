#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cf) = io::parse_quotients(text) {
            assert!(cf.quotients()[1..].iter().all(|&a| a >= 1));
            let _ = cf.convergents();
        }
    }
});
