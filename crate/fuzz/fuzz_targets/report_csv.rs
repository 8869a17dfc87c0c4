#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = parapde::report::ExperimentReport::from_csv(text) {
            // Accepted CSV round-trips losslessly.
            let again = parapde::report::ExperimentReport::from_csv(&report.to_csv())
                .expect("emitted CSV must parse");
            assert_eq!(again.rows, report.rows);
        }
    }
});
