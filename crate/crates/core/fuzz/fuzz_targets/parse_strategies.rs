#![no_main]

use libfuzzer_sys::fuzz_target;
use matchpoa::format::{parse_strategies, serialize_strategies};

fuzz_target!(|text: &str| {
    if let Ok(profile) = parse_strategies(text) {
        assert_eq!(parse_strategies(&serialize_strategies(&profile)).unwrap(), profile);
    }
});
