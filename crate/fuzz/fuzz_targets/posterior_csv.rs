#![no_main]

use argbayes::bayes::PosteriorKind;
use argbayes::io::parse_posterior;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_posterior(text, PosteriorKind::Exact);
    }
});
