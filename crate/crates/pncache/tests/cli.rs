use std::process::{Command, Output};

use pncache::harness::experiment::{BOUND_COLUMNS, NDT_COLUMNS, ORACLE_COLUMNS};
use pncache::harness::{parse, Format, Value};
use pncache_core::rational::q;

fn pncache(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pncache")).args(args).output().unwrap()
}

const REFERENCE: &[&str] = &["--users", "5", "--antennas", "2", "--perfect-users", "2", "--gamma", "1/4"];

fn with<'a>(mode: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![mode];
    v.extend_from_slice(REFERENCE);
    v.extend_from_slice(extra);
    v
}

#[test]
fn ndt_reference_row() {
    let out = pncache(&with("ndt", &[]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t = parse(NDT_COLUMNS, Format::Csv, out.stdout.as_slice()).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.get(0, "ndt"), Some(&Value::Frac(q(3, 2))));
    assert_eq!(t.get(0, "dof"), Some(&Value::Frac(q(5, 2))));
    assert_eq!(t.get(0, "separate"), Some(&Value::Frac(q(57, 28))));
}

#[test]
fn json_matches_csv() {
    let csv = pncache(&with("sweep", &["--steps", "4"]));
    let json = pncache(&with("sweep", &["--steps", "4", "--format", "json"]));
    assert_eq!((csv.status.code(), json.status.code()), (Some(0), Some(0)));
    let a = parse(NDT_COLUMNS, Format::Csv, csv.stdout.as_slice()).unwrap();
    let b = parse(NDT_COLUMNS, Format::Json, json.stdout.as_slice()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 5);
}

#[test]
fn config_file_and_inline_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "K = 5\nL = 2\nK_P = 2\ngamma_num = 1\ngamma_den = 2\n").unwrap();
    let p = path.to_str().unwrap();

    let base = parse(NDT_COLUMNS, Format::Csv, pncache(&["ndt", "--config", p]).stdout.as_slice()).unwrap();
    assert_eq!(base.get(0, "gamma"), Some(&Value::Frac(q(1, 2))));
    let over = parse(NDT_COLUMNS, Format::Csv, pncache(&["ndt", "--config", p, "--gamma", "1/4"]).stdout.as_slice()).unwrap();
    assert_eq!(over.get(0, "ndt"), Some(&Value::Frac(q(3, 2))));
}

#[test]
fn out_file_equals_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let args = ["bounds", "--users", "4", "--gamma", "1/4"];
    let stdout = pncache(&args).stdout;
    let mut to_file = args.to_vec();
    to_file.extend(["--out", path.to_str().unwrap()]);
    let out = pncache(&to_file);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, stdout);
    assert!(!parse(BOUND_COLUMNS, Format::Csv, written.as_slice()).unwrap().rows.is_empty());
}

#[test]
fn oracle_mode_passes() {
    let out = pncache(&with("oracle", &["--seeds", "3", "--demands", "2", "--seed", "7"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t = parse(ORACLE_COLUMNS, Format::Csv, out.stdout.as_slice()).unwrap();
    assert_eq!(t.rows.len(), 6);
    assert!((0..6).all(|r| t.get(r, "pass") == Some(&Value::Bool(true))));
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        vec!["ndt", "--users", "5", "--antennas", "1", "--perfect-users", "2", "--gamma", "0"],
        vec!["ndt", "--users", "4", "--gamma", "3/2"],
        vec!["ndt", "--users", "4", "--gamma", "0", "--format", "xml"],
        vec!["ndt", "--config", "/nonexistent/s.toml"],
        vec!["simulate", "--users", "3", "--gamma", "0", "--pdb-min", "10", "--pdb-max", "0"],
    ] {
        let out = pncache(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn failed_check_exits_one() {
    // Too few trials on a narrow grid leaves the fitted slope far from the DoF.
    let out = pncache(&with("simulate", &["--pdb-min", "0", "--pdb-max", "20", "--pdb-step", "10", "--trials", "2"]));
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn deterministic_output() {
    let args = with("simulate", &["--trials", "20", "--seed", "3"]);
    let (a, b) = (pncache(&args), pncache(&args));
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}
