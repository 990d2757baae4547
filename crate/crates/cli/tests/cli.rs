use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qedbloch_cli::config::Source;
use qedbloch_cli::RunConfig;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn qedbloch(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qedbloch"));
    cmd.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("QEDBLOCH_")) {
        cmd.env_remove(k);
    }
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn shipped_configs_round_trip() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = RunConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(cfg.serialize(), again.serialize(), "{}", path.display());
    }
}

#[test]
fn shipped_default_config_is_all_defaults() {
    let cfg = RunConfig::parse(&fs::read_to_string(configs().join("default.toml")).unwrap()).unwrap();
    assert_eq!(cfg.source("oracle", "hbar"), Some(Source::Default));
    assert_eq!(cfg.serialize(), RunConfig::parse("").unwrap().serialize());
}

#[test]
fn correction_vanishes_at_zero_and_stays_nonpositive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("correction.toml");
    let out = qedbloch(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "correction"], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("correction.csv")).unwrap();
    assert!(csv.starts_with("# qedbloch"));
    assert!(csv.contains("# kind = gaussian"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 201);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][4], 0.0);
    assert!(rows.iter().all(|r| r[4] <= 0.0));
    assert!(rows.iter().any(|r| r[4] < -1e-3));
}

#[test]
fn bound_on_the_trajectory_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = qedbloch(
        &["--out", dir.path().to_str().unwrap(), "bound"],
        &[("QEDBLOCH_BOUND_X", "0.01,0.02"), ("QEDBLOCH_BOUND_ORACLE", "false")],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().next(), Some("bound = 1.0"));
}

#[test]
fn same_config_and_seed_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = configs().join("bound.toml");
    for dir in [&a, &b] {
        let out = qedbloch(&["--config", cfg.to_str().unwrap(), "--seed", "11", "--out", dir.path().to_str().unwrap(), "bound"], &[]);
        assert!(out.status.success());
    }
    for name in ["bound.csv", "bound.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let csv = fs::read_to_string(a.path().join("bound.csv")).unwrap();
    assert!(csv.contains("# seed = 11"));
    assert!(!csv.contains("# seed = 11  # default"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let missing = qedbloch(&["--out", out_dir, "bound"], &[]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing required key 'x' in [bound]"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[oracle]\nhbar = -0.1\n").unwrap();
    assert_eq!(qedbloch(&["--config", bad.to_str().unwrap(), "--out", out_dir, "oracle"], &[]).status.code(), Some(1));

    fs::write(&bad, "[orcale]\nhbar = 0.1\n").unwrap();
    let typo = qedbloch(&["--config", bad.to_str().unwrap(), "--out", out_dir, "oracle"], &[]);
    assert_eq!(typo.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&typo.stderr).contains("oracle"));

    // far more photons than the basis holds
    let numeric = qedbloch(&["--out", out_dir, "oracle"], &[("QEDBLOCH_ORACLE_AMPLITUDES", "40,0"), ("QEDBLOCH_ORACLE_N_MAX", "4")]);
    assert_eq!(numeric.status.code(), Some(2), "{}", String::from_utf8_lossy(&numeric.stderr));

    let scope = qedbloch(&["--out", out_dir, "correction"], &[("QEDBLOCH_SYSTEM_B_EXT", "1,0,0")]);
    assert_eq!(scope.status.code(), Some(1));
}

#[test]
fn oracle_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = qedbloch(&["--out", dir.path().to_str().unwrap(), "oracle"], &[("QEDBLOCH_TIME_SAMPLES", "11"), ("QEDBLOCH_TIME_T_FINAL", "1")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = data_rows(&fs::read_to_string(dir.path().join("oracle.csv")).unwrap());
    assert_eq!(rows.len(), 11);
    // spin up starts at +1
    assert!((rows[0][1] - 1.0).abs() < 1e-12);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert!(json["norm_drift"].as_f64().unwrap() < 1e-10);
}

#[test]
fn selftest_passes_on_shipped_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("default.toml");
    let out = qedbloch(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "selftest"], &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS C")).count(), 8);
    let rows = data_rows(&fs::read_to_string(dir.path().join("selftest.csv")).unwrap());
    assert!(rows.iter().all(|r| r[1] == 1.0));
}
