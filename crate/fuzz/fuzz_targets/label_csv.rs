#![no_main]

use libfuzzer_sys::fuzz_target;
use memlab::labels::LabelTable;

fuzz_target!(|data: &[u8]| {
    let _ = LabelTable::read_csv(data);
});
