#![no_main]

use argbayes::af::ArgumentNames;
use argbayes::io::{observations_to_csv, parse_observations};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let names = ArgumentNames::alphabetic(5);
    if let Ok(obs) = parse_observations(text, &names) {
        let again = parse_observations(&observations_to_csv(&obs, &names), &names).unwrap();
        assert_eq!(again, obs);
    }
});
