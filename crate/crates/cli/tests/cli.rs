use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const FAST: &str = "pointwise_samples = 2000\nquadform_samples = 500\nlinearity_samples = 32\nbarrier_samples = 64\n";

fn stabcert(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabcert"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fast_config(dir: &TempDir) -> PathBuf {
    let p = dir.path().join("fast.cfg");
    fs::write(&p, FAST).unwrap();
    p
}

#[test]
fn verify_3_passes_and_records_epsilon() {
    let dir = TempDir::new().unwrap();
    let cfg = fast_config(&dir);
    let o = stabcert(dir.path(), &["verify", "3", "--config", cfg.to_str().unwrap(), "--out", "c3.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let json = fs::read_to_string(dir.path().join("c3.json")).unwrap();
    assert!(json.contains("\"9/11\""));
    assert!(json.contains("\"schema_version\": \"1\""));
}

#[test]
fn verify_5_strict_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = fast_config(&dir);
    let o = stabcert(dir.path(), &["verify", "--n", "5", "--strict", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(dir.path().join("certificate-verify-5.json").exists());
}

#[test]
fn unknown_row_and_bad_config_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&stabcert(dir.path(), &["verify", "7"])), 2);
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "pointwise_samples = many\n").unwrap();
    assert_eq!(code(&stabcert(dir.path(), &["verify", "3", "--config", bad.to_str().unwrap()])), 2);
    assert_eq!(code(&stabcert(dir.path(), &["verify", "3", "--cms", "-1"])), 2);
    assert_eq!(code(&stabcert(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn empty_config_records_defaults() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "# defaults only\n").unwrap();
    let o = stabcert(dir.path(), &["verify", "4", "--config", empty.to_str().unwrap(), "--out", "c4.json"]);
    assert_eq!(code(&o), 0);
    let json = fs::read_to_string(dir.path().join("c4.json")).unwrap();
    assert!(json.contains("\"pointwise_samples\": \"100000\""));
    assert!(json.contains("\"barrier_samples\": \"1000\""));
}

#[test]
fn report_is_read_only_and_follows_content() {
    let dir = TempDir::new().unwrap();
    let cfg = fast_config(&dir);
    assert_eq!(code(&stabcert(dir.path(), &["verify", "3", "--config", cfg.to_str().unwrap(), "--out", "c.json"])), 0);
    let path = dir.path().join("c.json");
    let before = fs::read(&path).unwrap();
    let o = stabcert(dir.path(), &["report", "c.json", "--strict"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("epsilon = 9/11"));
    assert_eq!(fs::read(&path).unwrap(), before);

    // a quoted value that no longer matches is a discrepancy
    let text = String::from_utf8(before).unwrap();
    let tampered = text.replacen("\"matches\": true", "\"matches\": false", 1);
    fs::write(dir.path().join("t.json"), tampered).unwrap();
    assert_eq!(code(&stabcert(dir.path(), &["report", "t.json"])), 0);
    assert_eq!(code(&stabcert(dir.path(), &["report", "t.json", "--strict"])), 3);

    let failed = text.replacen("\"status\": \"pass\"", "\"status\": \"fail\"", 1);
    fs::write(dir.path().join("f.json"), failed).unwrap();
    assert_eq!(code(&stabcert(dir.path(), &["report", "f.json"])), 1);

    fs::write(dir.path().join("junk.json"), "{").unwrap();
    assert_eq!(code(&stabcert(dir.path(), &["report", "junk.json"])), 2);
}

#[test]
fn verify_all_with_c_ms_includes_eps1() {
    let dir = TempDir::new().unwrap();
    let cfg = fast_config(&dir);
    let o = stabcert(dir.path(), &["verify-all", "--cms", "1", "--radius", "1e6", "--config", cfg.to_str().unwrap(), "--out", "all.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let json = fs::read_to_string(dir.path().join("all.json")).unwrap();
    assert!(json.contains("epsilon1 thresholds"));
    assert!(json.contains("\"21/22\""));
}

#[test]
fn optimize_reports_findings_and_uncertified_searches() {
    let dir = TempDir::new().unwrap();
    let o = stabcert(dir.path(), &["optimize", "--n", "3", "--budget", "20000"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("FINDING"));
    assert!(dir.path().join("certificate-optimize-3.json").exists());
    assert_eq!(code(&stabcert(dir.path(), &["report", "certificate-optimize-3.json"])), 0);

    let o = stabcert(dir.path(), &["optimize", "--n", "6", "--budget", "2000", "--out", "six.json"]);
    assert_eq!(code(&o), 4);
    assert_eq!(code(&stabcert(dir.path(), &["report", "six.json"])), 4);
}

#[test]
fn recursion_sim_trivial_and_derived() {
    let dir = TempDir::new().unwrap();
    let o = stabcert(dir.path(), &["recursion-sim", "--n", "3", "--s1", "0.5", "--c0", "1", "--log2-c", "0", "--steps", "4"]);
    assert_eq!(code(&o), 0);
    // ln bound at l = 1 is 3 ln(1/2)
    assert!(stdout(&o).contains("-2.079442e0"), "{}", stdout(&o));

    let o = stabcert(dir.path(), &["recursion-sim", "--n", "3", "--s1", "1", "--c0", "1", "--log2-c", "0", "--steps", "3"]);
    assert_eq!(code(&o), 0);

    let o = stabcert(
        dir.path(),
        &["recursion-sim", "--n", "3", "--s1", "1e-30", "--q", "1/2", "--delta", "1", "--cms", "1", "--radius", "1e6", "--out", "r.json"],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("tends to 0: true"));
    assert!(dir.path().join("r.json").exists());

    assert_eq!(code(&stabcert(dir.path(), &["recursion-sim", "--n", "3", "--s1", "-1", "--c0", "1", "--log2-c", "0"])), 2);
}
