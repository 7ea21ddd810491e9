#![no_main]

use libfuzzer_sys::fuzz_target;
use recurve::harness::{parse_csv, rows_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_csv(text) {
        // Emitting and parsing again is a fixed point.
        let out = rows_to_csv(&rows).unwrap();
        assert_eq!(parse_csv(&out).unwrap(), rows);
    }
});
