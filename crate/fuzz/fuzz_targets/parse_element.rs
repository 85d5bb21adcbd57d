#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(x) = io::parse_element(data) {
        let back = io::parse_element(io::element_to_json(&x).expect("serializable").as_bytes()).expect("round trip");
        assert_eq!(back, x);
    }
});
