#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Must never panic; on success the canonical params string and the
        // typed accessors must not panic either.
        if let Ok(config) = parapde::config::ExperimentConfig::parse_str(text) {
            let _ = config.params_string();
            let _ = config.get_f64("dt", 1e-3);
            let _ = config.get_usize("n-modes", 8);
            let _ = config.get_str("method", "direct");
        }
    }
});
