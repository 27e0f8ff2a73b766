//! End-to-end runs of the `qdisk` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("job.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_qdisk"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn summary(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(format!("{command}.json"))).unwrap()).unwrap()
}

#[test]
fn product_of_adjoint_shift_and_shift_is_identity() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), r#"{"command":"algebra","operation":"multiply","operands":["U*","U"]}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path(), "algebra");
    assert_eq!(s["is_identity"], Value::Bool(true));
    assert_eq!(s["result"]["modes"].as_array().unwrap().len(), 1);
    assert_eq!(s["result"]["modes"][0]["n"], 0);
}

#[test]
fn fock_parametrix_is_compact() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), r#"{"command":"parametrix","operator":{"space":"fock","beta":"k+1"}}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(summary(dir.path(), "parametrix")["verdict"], "compact_parametrices");
    let csv = fs::read_to_string(dir.path().join("out/parametrix_eigenvalues.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,re,im"));
    assert_eq!(lines.nth(2), Some("2,2,0"));
}

#[test]
fn nogo_heatmap_shows_the_boundary() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), r#"{"command":"nogo","beta":"k+1","alpha":"k+1"}"#, &["--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(dir.path(), "nogo");
    let boundary = s["boundary"].as_f64().unwrap();
    assert!((boundary - 1.5).abs() <= 0.2, "{boundary}");
    assert_eq!(s["verdict"], "incompatible_with_compact_parametrices");
    let csv = fs::read_to_string(dir.path().join("out/nogo_heatmap.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re_lambda,im_lambda,exponent,verdict"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 41 * 9);
    assert!(rows[0].starts_with("-4,-2,"));
    assert!(rows.iter().any(|r| r.ends_with(",degenerate")));
}

#[test]
fn unknown_keys_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), r#"{"command":"nogo","beta":"k+1","alpha":"k+1","colour":"red"}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), r#"{"command":"algebra","operation":"multiply","operands":["U**"]}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_guards_exit_with_code_three() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"command":"nogo","beta":"k+1","alpha":"k+1","w":"2^(-(k+1))","size":5000}"#;
    assert_eq!(run(dir.path(), config, &[]).status.code(), Some(3));
    let config = r#"{"command":"appendix","operator":{"sign":"plus","n":1,"beta":"k+1"},"lambda":[2,0],"size":8}"#;
    assert_eq!(run(dir.path(), config, &[]).status.code(), Some(3));
}

#[test]
fn failed_checks_exit_with_code_one() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"command":"appendix","seeds":3,"tol":0}"#;
    let out = run(dir.path(), config, &["--seed", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary(dir.path(), "appendix")["passed"], Value::Bool(false));
}

#[test]
fn same_config_gives_identical_output() {
    let configs = [
        r#"{"command":"nogo","beta":"k+1","alpha":"k+1","size":5000}"#,
        r#"{"command":"appendix","seeds":4}"#,
        r#"{"command":"derive","beta":"sqrt(k+1)","defect_at":[10,100],"apply":["U"]}"#,
        r#"{"command":"states","lambda_inf":0,"weights":"2^(-(k+1))","evaluate":["e_0"],"gns_norms":["U"]}"#,
        r#"{"command":"implement","operator":{"space":"weighted","kind":"covariant","w":"2^(-(k+1))"},"size":32}"#,
        r#"{"command":"algebra","operation":"rotate","operands":["U [k]"],"theta":0.5,"laws":{"triples":20}}"#,
    ];
    for config in configs {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        assert_eq!(run(a.path(), config, &["--seed", "9"]).status.code(), Some(0), "{config}");
        assert_eq!(run(b.path(), config, &["--seed", "9", "--threads", "1"]).status.code(), Some(0));
        let mut files: Vec<_> = fs::read_dir(a.path().join("out")).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        assert!(!files.is_empty());
        for name in files {
            let x = fs::read(a.path().join("out").join(&name)).unwrap();
            let y = fs::read(b.path().join("out").join(&name)).unwrap();
            assert_eq!(x, y, "{config}: {name:?}");
        }
    }
}

#[test]
fn implementation_check_passes_for_every_variant() {
    for (space, kind) in [("fock", "invariant"), ("fock", "covariant"), ("circle", "invariant"), ("circle", "covariant"), ("weighted", "invariant"), ("weighted", "covariant")] {
        let dir = TempDir::new().unwrap();
        let config = format!(
            r#"{{"command":"implement","operator":{{"space":"{space}","kind":"{kind}","w":"2^(-(k+1))"}},"size":48}}"#
        );
        let out = run(dir.path(), &config, &[]);
        assert_eq!(out.status.code(), Some(0), "{space} {kind}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(summary(dir.path(), "implement")["passed"], Value::Bool(true));
    }
}
