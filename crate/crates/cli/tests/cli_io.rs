use std::fs;
use std::path::Path;
use std::process::Command as Proc;

use proptest::prelude::*;
use sato_tate::{build_trace_table, CurveQ, TableConfig};
use sato_tate_cli::cache::{read_table, write_table, TableCache};
use sato_tate_cli::{run_job, CliError, Command, Format, JobSpec};

const BIN: &str = env!("CARGO_BIN_EXE_satotate");

fn spec(command: Command) -> JobSpec {
    JobSpec {
        command,
        curve: None,
        curve2: None,
        x: None,
        interval: None,
        interval2: None,
        ell: 2,
        conductor: None,
        conductor2: None,
        format: Format::Json,
        out: None,
        threads: None,
        cache_dir: None,
        delta: None,
        r: 1,
        m: 5000,
    }
}

fn schema() -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/report.schema.json");
    let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&value).unwrap()
}

fn assert_valid_lines(bytes: &[u8]) {
    let s = schema();
    let text = std::str::from_utf8(bytes).unwrap();
    assert!(!text.is_empty());
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let msgs: Vec<String> = match s.validate(&v) {
            Ok(()) => continue,
            Err(errors) => errors.map(|e| e.to_string()).collect(),
        };
        panic!("{line}\n{msgs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn table_round_trip(a4 in -20i64..20, a6 in -20i64..20, x in 2.0f64..3000.0) {
        let Ok(c) = CurveQ::short(a4, a6) else { return Ok(()) };
        let t = build_trace_table(&c, x, &TableConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let back = read_table(&c, buf.as_slice()).unwrap();
        prop_assert_eq!(back.records(), t.records());
        prop_assert_eq!(back.cutoff(), t.cutoff());
    }
}

#[test]
fn checksum_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = TableCache::new(Some(dir.path().to_path_buf()), TableConfig::default());
    let a = CurveQ::from_coeffs([0, -1, 1, -10, -20]).unwrap().with_label("E");
    let b = CurveQ::from_coeffs([0, 0, 1, -1, 0]).unwrap().with_label("E");
    cache.load(&a, 500.0).unwrap();
    let err = cache.load(&b, 500.0).unwrap_err();
    assert!(matches!(err, CliError::Computation(ref m) if m.contains("checksum")), "{err}");
}

#[test]
fn cache_is_extended_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = TableCache::new(Some(dir.path().to_path_buf()), TableConfig::default());
    let a = CurveQ::from_coeffs([0, -1, 1, -10, -20]).unwrap().with_label("11a1");
    let small = cache.load(&a, 1000.0).unwrap();
    let big = cache.load(&a, 3000.0).unwrap();
    let path = cache.path_for(&a).unwrap();
    let header = fs::read_to_string(&path).unwrap();
    assert!(header.lines().next().unwrap().ends_with("cutoff=3000"));
    assert_eq!(&big.records()[..small.records().len()], small.records());
    let again = cache.load(&a, 1000.0).unwrap();
    assert_eq!(again, small);
}

#[test]
fn joint_with_mismatched_cached_cutoffs() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(Command::Ap);
    s.cache_dir = Some(dir.path().to_path_buf());
    s.curve = Some("11a1=0,-1,1,-10,-20".into());
    s.x = Some("1000".into());
    run_job(&s).unwrap();
    s.curve = Some("37a1=0,0,1,-1,0".into());
    s.x = Some("4000".into());
    run_job(&s).unwrap();
    let mut j = spec(Command::Joint);
    j.cache_dir = Some(dir.path().to_path_buf());
    j.curve = Some("11a1=0,-1,1,-10,-20".into());
    j.curve2 = Some("37a1=0,0,1,-1,0".into());
    j.x = Some("3000".into());
    j.interval = Some("0:0.5".into());
    j.interval2 = Some("0.5:1".into());
    let out = run_job(&j).unwrap();
    assert_valid_lines(&out);
    let fresh = {
        let mut k = j.clone();
        k.cache_dir = None;
        run_job(&k).unwrap()
    };
    assert_eq!(out, fresh);
}

#[test]
fn all_json_outputs_match_schema() {
    let mut jobs = Vec::new();
    let mut s = spec(Command::Ap);
    s.curve = Some("0,-1,1,-10,-20".into());
    s.x = Some("200".into());
    jobs.push(s.clone());
    s.command = Command::Angles;
    jobs.push(s.clone());
    s.command = Command::Discrepancy;
    s.x = Some("100,200,300".into());
    s.interval = Some("0.25:0.75".into());
    jobs.push(s.clone());
    s.command = Command::Bounds;
    s.curve2 = Some("0,0,1,-1,0".into());
    jobs.push(s.clone());
    s.command = Command::Joint;
    jobs.push(s.clone());
    s.command = Command::Distinguish;
    s.x = Some("300".into());
    jobs.push(s.clone());
    let mut k = spec(Command::KernelCheck);
    k.interval = Some("0.2:0.7".into());
    k.delta = Some(0.05);
    k.r = 2;
    k.m = 50;
    jobs.push(k);
    for j in jobs {
        let out = run_job(&j).unwrap_or_else(|e| panic!("{:?}: {e}", j.command));
        assert_valid_lines(&out);
    }
    let e = CliError::Validation("x".into());
    assert_valid_lines(e.to_json().as_bytes());
}

#[test]
fn binary_exit_codes_and_error_json() {
    let out = Proc::new(BIN)
        .args(["kernel-check", "--interval", "0.2:0.6", "--delta", "0.25"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("delta <= B - A"));
    assert_valid_lines(&out.stderr);

    let out = Proc::new(BIN).args(["ap", "--curve", "0,0", "--x", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Proc::new(BIN).args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("11a1.csv"), "garbage\n").unwrap();
    let out = Proc::new(BIN)
        .args(["ap", "--curve", "11a1=0,-1,1,-10,-20", "--x", "100", "--cache-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_valid_lines(&out.stderr);

    let out = Proc::new(BIN)
        .args(["ap", "--curve", "1,1", "--x", "30", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("p,reduction,a_p\n2,bad,\n3,good,"));
}

#[test]
fn output_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub/report.csv");
    let mut s = spec(Command::Discrepancy);
    s.curve = Some("0,-1,1,-10,-20".into());
    s.x = Some("1000".into());
    s.format = Format::Csv;
    s.out = Some(path.clone());
    let bytes = run_job(&s).unwrap();
    assert_eq!(fs::read(&path).unwrap(), bytes);
    assert!(String::from_utf8(bytes).unwrap().starts_with("x,observed,main,diff,ratio\n1000,"));
}
