#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(field) = parapde::spectral::SpectralField::from_json(text) {
            // A decoded field satisfies the structural invariants, so the
            // round trip must succeed and reproduce the record.
            let re = parapde::spectral::SpectralField::from_json(&field.to_json())
                .expect("re-encode of a valid field must decode");
            assert_eq!(re.grid(), field.grid());
            assert_eq!(re.coeffs().len(), field.coeffs().len());
        }
    }
});
