#![no_main]

use libfuzzer_sys::fuzz_target;
use memlab::analysis::ExperimentReport;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = serde_json::from_slice::<ExperimentReport>(data) {
        let text = serde_json::to_string(&report).unwrap();
        let _: ExperimentReport = serde_json::from_str(&text).unwrap();
    }
});
