use std::path::Path;
use std::process::{Command, Output};

use ffrestrict::experiments::{parse_results, CSV_HEADER};

fn ffrestrict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ffrestrict"))
        .args(args)
        .output()
        .expect("spawn cli")
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(ffrestrict(&["--help"]).status.code(), Some(0));
    assert_eq!(ffrestrict(&["sharpness", "--help"]).status.code(), Some(0));
    assert_eq!(ffrestrict(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(ffrestrict(&["sharpness", "--q", "three"]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    // not prime
    assert_eq!(ffrestrict(&["diagnose", "--p", "100"]).status.code(), Some(1));
    // q above the critical exponent in a sharpness sweep
    assert_eq!(ffrestrict(&["sharpness", "--q", "7"]).status.code(), Some(1));
    // boundedness below the critical exponent
    assert_eq!(ffrestrict(&["boundedness", "--q", "3"]).status.code(), Some(1));
    // weak signal without the override
    assert_eq!(ffrestrict(&["sharpness", "--q", "5.9"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"n": 1, "unknown_field": 3}"#).unwrap();
    assert_eq!(ffrestrict(&["sharpness", "--config", path_arg(&cfg)]).status.code(), Some(1));
}

#[test]
fn csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let run = ffrestrict(&["sharpness", "--q", "3,3.5", "--seed", "1,2", "--output", path_arg(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 8);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 14, "{row}");
        assert_eq!(fields[12], "witness");
        assert!(fields[11].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let run = ffrestrict(&[
        "boundedness",
        "--q",
        "8",
        "--seed",
        "3",
        "--prime-max",
        "1000",
        "--prime-count",
        "3",
        "--format",
        "json",
        "--output",
        path_arg(&out),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let doc = parse_results(&text).unwrap();
    assert_eq!(doc.report.results.len(), 1);
    assert_eq!(doc.report.results[0].rows.len(), 3);
    let again = serde_json::to_string_pretty(&doc).unwrap() + "\n";
    assert_eq!(parse_results(&again).unwrap(), doc);
    assert_eq!(again, text);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"q_list": [3, 3.5], "seeds": [5, 6], "prime_count": 5}"#).unwrap();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("r{i}.csv"));
        let run = ffrestrict(&["sharpness", "--config", path_arg(&cfg), "--output", path_arg(&out)]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn single_prime_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = ffrestrict(&["diagnose", "--p", "101", "--seed", "4"]);
    assert!(d.status.success());
    let v: serde_json::Value = serde_json::from_slice(&d.stdout).unwrap();
    assert!(v.is_object());

    let w = dir.path().join("w");
    let r = ffrestrict(&["rstar", "--p", "61", "--q", "3,inf", "--witness-out", path_arg(&w)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let list: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert!(list.as_array().unwrap().len() >= 3);

    let set = dir.path().join("par.txt");
    let c = ffrestrict(&["construct", "--kind", "paraboloid", "--p", "5", "--n", "2", "--output", path_arg(&set)]);
    assert!(c.status.success(), "{}", String::from_utf8_lossy(&c.stderr));
    let first = std::fs::read_to_string(&set).unwrap();
    assert!(first.starts_with("5 2 5"), "{first}");

    let s = ffrestrict(&["selftest", "--trials", "3"]);
    assert_eq!(s.status.code(), Some(0));
}
