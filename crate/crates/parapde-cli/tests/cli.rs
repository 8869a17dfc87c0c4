//! End-to-end CLI checks: exit codes, determinism, config files, and the
//! oracle fixture workflow.

use std::process::Command;

fn parapde() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parapde"))
}

#[test]
fn usage_errors_exit_one() {
    let out = parapde().arg("no-such-subcommand").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = parapde()
        .args(["burgers", "--observable", "bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = parapde().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("parapde"));
}

#[test]
fn passing_experiment_exits_zero_and_is_deterministic() {
    let run = || {
        parapde()
            .args(["ou", "--m", "16", "--replicas", "400", "--seed", "11"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "reports must be byte-identical");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("experiment,params,statistic,value,stderr,n"));
}

#[test]
fn json_format_and_out_file() {
    let dir = std::env::temp_dir().join("parapde-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("report.json");
    let out = parapde()
        .args([
            "noise",
            "--m",
            "16",
            "--replicas",
            "50",
            "--seed",
            "3",
            "--format",
            "json",
            "--out",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let report = parapde::report::ExperimentReport::from_json(&text).unwrap();
    assert!(!report.rows.is_empty());
    assert_eq!(report.metadata.seed, 3);
    assert!(report.metadata.wall_ms.is_none());
}

#[test]
fn config_file_drives_the_run_and_flags_override() {
    let dir = std::env::temp_dir().join("parapde-cli-config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("exp.conf");
    std::fs::write(&cfg, "experiment = ignored-by-subcommand\nseed = 9\nreplicas = 60\nm = 16\n").unwrap();
    let out = parapde()
        .args(["noise", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(",50") || text.contains("n")); // rows present
    // Bad config file is a usage error.
    let bad = dir.join("bad.conf");
    std::fs::write(&bad, "this is not a config").unwrap();
    let out = parapde().args(["noise", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn oracle_check_flags_drift_with_exit_two() {
    let dir = std::env::temp_dir().join("parapde-oracle-test");
    std::fs::create_dir_all(&dir).unwrap();
    let fixtures = dir.join("constants.json");
    let regen = parapde()
        .args(["oracle", "regen", "--fixtures"])
        .arg(&fixtures)
        .output()
        .unwrap();
    assert_eq!(regen.status.code(), Some(0));
    let check = parapde()
        .args(["oracle", "check", "--fixtures"])
        .arg(&fixtures)
        .output()
        .unwrap();
    assert_eq!(check.status.code(), Some(0));
    // Tamper with one value: the check must fail with the tolerance code.
    let mut table: Vec<parapde::renorm::ConstantRow> =
        serde_json::from_str(&std::fs::read_to_string(&fixtures).unwrap()).unwrap();
    table[0].value += 1e-9;
    std::fs::write(&fixtures, serde_json::to_string_pretty(&table).unwrap()).unwrap();
    let check = parapde()
        .args(["oracle", "check", "--fixtures"])
        .arg(&fixtures)
        .output()
        .unwrap();
    assert_eq!(check.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&check.stderr).contains("drift"));
}

#[test]
fn partition_multipliers_export() {
    let dir = std::env::temp_dir().join("parapde-partition-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("multipliers.csv");
    let out = parapde()
        .args(["partition-check", "--m", "32", "--multipliers-out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("j,k_index,value"));
    assert!(text.lines().count() > 10);
}

#[test]
fn wick_tree_table_export() {
    let dir = std::env::temp_dir().join("parapde-wick-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trees.json");
    let out = parapde()
        .args(["wick", "--max-degree", "4", "--trees-out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(parsed.as_array().unwrap().len() >= 8);
}
