#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = parapde::report::ExperimentReport::from_json(text) {
            let again = parapde::report::ExperimentReport::from_json(&report.to_json())
                .expect("emitted JSON must parse");
            assert_eq!(again, report);
        }
    }
});
