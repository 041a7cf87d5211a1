#![no_main]

use argbayes::io::{framework_to_json, parse_framework};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(nf) = parse_framework(text) {
        let again =
            parse_framework(&framework_to_json(&nf)).expect("serialized framework reparses");
        assert_eq!(again, nf);
    }
});
