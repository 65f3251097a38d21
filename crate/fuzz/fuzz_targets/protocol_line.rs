#![no_main]

use libfuzzer_sys::fuzz_target;
use memlab::predictor::{parse_response_line, Response};

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(Response::Score(path, s)) = parse_response_line(line) {
        assert!(!path.is_empty());
        assert!((0.0..=1.0).contains(&s));
    }
});
