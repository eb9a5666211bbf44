#![no_main]

use libfuzzer_sys::fuzz_target;
use matchpoa::format::{parse_instance, serialize_instance};

fuzz_target!(|text: &str| {
    if let Ok(profile) = parse_instance(text) {
        let again = parse_instance(&serialize_instance(&profile)).expect("canonical form parses");
        assert_eq!(again, profile);
    }
});
