#![no_main]

use libfuzzer_sys::fuzz_target;
use memlab::edits::{parse_recipes, recipes_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(specs) = parse_recipes(text) {
        // Anything accepted must survive a round trip unchanged.
        let again = parse_recipes(&recipes_to_json(&specs)).expect("re-parse");
        assert_eq!(again, specs);
        for s in &specs {
            let _ = s.expand();
        }
    }
});
