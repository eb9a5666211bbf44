#![no_main]

use libfuzzer_sys::fuzz_target;
use matchpoa::rational::{format_rational, parse_rational};

fuzz_target!(|text: &str| {
    // Long inputs only slow the big-integer arithmetic down.
    if text.len() > 256 {
        return;
    }
    if let Ok(r) = parse_rational(text) {
        assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
    }
});
