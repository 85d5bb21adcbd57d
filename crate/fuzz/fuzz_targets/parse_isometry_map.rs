#![no_main]

use libfuzzer_sys::fuzz_target;
use qprop::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = io::parse_isometry_map(data) {
        let back = io::parse_isometry_map(io::isometry_map_to_json(&m).expect("serializable").as_bytes()).expect("round trip");
        assert_eq!(back.level_perms, m.level_perms);
    }
});
