#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(t) = io::parse_tower(data) {
        let back = io::parse_tower(io::tower_to_json(&t).expect("serializable").as_bytes()).expect("round trip");
        assert_eq!(back, t);
    }
});
