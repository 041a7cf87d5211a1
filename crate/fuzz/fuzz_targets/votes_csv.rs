#![no_main]

use argbayes::io::{ObservationConvention, VoteMatrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(matrix) = VoteMatrix::parse_csv(text) {
        for convention in ["row-as-set", "row-as-set:include", "cell-as-singleton"] {
            let _ = matrix.observations(convention.parse::<ObservationConvention>().unwrap());
        }
        assert_eq!(VoteMatrix::parse_csv(&matrix.to_csv()).unwrap(), matrix);
    }
});
