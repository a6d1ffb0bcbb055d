#![no_main]

use libfuzzer_sys::fuzz_target;
use qchemflow::data::{from_json, parse_xyz, to_json, Structure};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_xyz(text) {
        let back: Structure = from_json(&to_json(&s)).expect("parsed structure must round-trip");
        assert_eq!(back, s);
    }
});
