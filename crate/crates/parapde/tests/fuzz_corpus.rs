//! Feed every committed fuzz-corpus seed through the same entry points the
//! fuzz targets exercise, so the corpus stays valid as the formats evolve.

use std::fs;
use std::path::PathBuf;

fn corpus_dir(target: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target)
}

fn corpus_files(target: &str) -> Vec<Vec<u8>> {
    let dir = corpus_dir(target);
    let mut out = Vec::new();
    for entry in fs::read_dir(&dir).unwrap_or_else(|_| panic!("missing corpus {dir:?}")) {
        out.push(fs::read(entry.unwrap().path()).unwrap());
    }
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn config_corpus_digests_without_panicking() {
    for data in corpus_files("config_parse") {
        if let Ok(text) = std::str::from_utf8(&data) {
            if let Ok(cfg) = parapde::config::ExperimentConfig::parse_str(text) {
                let _ = cfg.params_string();
            }
        }
    }
}

#[test]
fn field_corpus_round_trips_on_accept() {
    let mut accepted = 0;
    for data in corpus_files("field_json") {
        if let Ok(text) = std::str::from_utf8(&data) {
            if let Ok(field) = parapde::spectral::SpectralField::from_json(text) {
                let re = parapde::spectral::SpectralField::from_json(&field.to_json()).unwrap();
                assert_eq!(re.grid(), field.grid());
                accepted += 1;
            }
        }
    }
    assert!(accepted >= 1, "corpus should contain at least one valid field");
}

#[test]
fn report_corpora_round_trip_on_accept() {
    let mut accepted = 0;
    for data in corpus_files("report_csv") {
        if let Ok(text) = std::str::from_utf8(&data) {
            if let Ok(report) = parapde::report::ExperimentReport::from_csv(text) {
                let again = parapde::report::ExperimentReport::from_csv(&report.to_csv()).unwrap();
                assert_eq!(again.rows, report.rows);
                accepted += 1;
            }
        }
    }
    for data in corpus_files("report_json") {
        if let Ok(text) = std::str::from_utf8(&data) {
            if let Ok(report) = parapde::report::ExperimentReport::from_json(text) {
                let again = parapde::report::ExperimentReport::from_json(&report.to_json()).unwrap();
                assert_eq!(again, report);
                accepted += 1;
            }
        }
    }
    assert!(accepted >= 2, "report corpora should contain valid seeds");
}
