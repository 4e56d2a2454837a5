use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn robba(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robba")).args(args).output().expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = robba(args);
    let text = String::from_utf8(out.stdout).unwrap();
    let v = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (out.status.code().unwrap(), v)
}

fn with_input(contents: &str, args: &[&str]) -> (i32, Value, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("input.json");
    std::fs::write(&path, contents).unwrap();
    let mut all: Vec<&str> = args.to_vec();
    all.push(path.to_str().unwrap());
    let out = robba(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v, String::from_utf8(out.stderr).unwrap())
}

fn strs(v: &Value) -> Vec<&str> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect()
}

#[test]
fn generic_polygon_of_the_worked_example() {
    let (code, v) = run_json(&["hn-generic", fixture("example73.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(strs(&v["slopes"]), ["0", "1"]);
    assert_eq!(v["method"], "cyclic vector");
}

#[test]
fn special_polygon_lies_above() {
    let (code, v) = run_json(&["compare", fixture("example73.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["comparison"], "special_above");
    assert_eq!(strs(&v["special_slopes"]), ["1/2", "1/2"]);
    assert_eq!(strs(&v["generic_slopes"]), ["0", "1"]);
    assert_eq!(strs(&v["endpoint"]), ["2", "1"]);

    let (code, w) = run_json(&["example-7-3"]);
    assert_eq!(code, 0);
    assert_eq!(w["comparison"], v["comparison"]);
    assert_eq!(w["special"], v["special"]);
    let (code, s) = run_json(&["hn-special", fixture("example73.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(strs(&s["slopes"]), ["1/2", "1/2"]);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("example73.json");
    let mut texts = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let o = robba(&["compare", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
        texts.push(std::fs::read(out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("selftest.json");
    let o = robba(&["selftest", "--seed", "42", "--instances", "50", "--out", out.to_str().unwrap()]);
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(o.status.success(), "{stderr}");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["suites"].as_array().unwrap().len(), 9);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS ")).count(), 9);
}

#[test]
fn element_input() {
    let (code, v, _) = with_input(r#"[[0, "1"], [5, "1"]]"#, &["polygon"]);
    assert_eq!(code, 0);
    assert_eq!(v["element"], serde_json::json!([[0, "1"], [5, "1"]]));
    assert!(v["slopes"].as_array().unwrap().is_empty());
    assert_eq!(v["is_unit"], true);

    let (code, v, _) = with_input(r#"{"element": [[0, "5"], [5, "1"]], "interval": ["0", "1"]}"#, &["polygon"]);
    assert_eq!(code, 0);
    assert_eq!(strs(&v["slopes"]), ["1/5"]);
}

#[test]
fn parse_errors_name_the_location() {
    let (code, v, err) = with_input("{\n  \"matrix\": [[[0, \"5\"]]\n", &["hn-generic"]);
    assert_eq!(code, 3);
    assert_eq!(v["error"], "parse_error");
    assert!(err.contains("line 3"), "{err}");

    let (code, _, err) = with_input(r#"{"matrix": [[[[0, "1"], [1, "x"]]]]}"#, &["hn-generic"]);
    assert_eq!(code, 3);
    assert!(err.contains("matrix[0][0][1][1]"), "{err}");

    let (code, _, err) = with_input(r#"{"y": [[0, "1"]], "r": "1/2"}"#, &["divrem"]);
    assert_eq!(code, 3);
    assert!(err.contains("\"x\""), "{err}");

    let missing = robba(&["compare", "/nonexistent/input.json"]);
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn slope_bearing_determinant_is_rejected() {
    // det = u + p has a slope on (0, 1].
    let (code, v, err) = with_input(r#"{"matrix": [[[[0, "5"], [1, "1"]]]]}"#, &["hn-generic"]);
    assert_eq!(code, 4);
    assert_eq!(v["error"], "invariant_violation");
    assert!(err.contains("determinant"), "{err}");
}

#[test]
fn overrides_are_checked_before_reading_input() {
    let o = robba(&["hn-generic", "/nonexistent/input.json", "--prec", "0"]);
    assert_eq!(o.status.code(), Some(4));
    let o = robba(&["hn-generic", "/nonexistent/input.json", "--window", "5:3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = robba(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("Usage"));
}

#[test]
fn failed_hypothesis_has_its_own_code() {
    // A D^-1 - I = [[0, 0], [u, 0]] is not topologically nilpotent.
    let doc = r#"{
        "matrix": [[[[0, "5"]], []], [[[1, "5"]], [[0, "1"]]]],
        "d": [[[[0, "5"]], []], [[], [[0, "1"]]]],
        "radius": "1/2"
    }"#;
    let (code, v, _) = with_input(doc, &["triangularize"]);
    assert_eq!(code, 5);
    assert_eq!(v["error"], "hypothesis_failed");

    let doc = doc.replace("[[1, \"5\"]]", "[[1, \"25\"]]");
    let (code, v, _) = with_input(&doc, &["triangularize", "--target", "10"]);
    assert_eq!(code, 0);
    assert!(v["certificate"]["residual_valuations"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn division_and_h1() {
    let (code, v, _) = with_input(r#"{"y": [[0, "1"]], "x": [[0, "5"], [1, "1"]], "r": "1/2"}"#, &["divrem"]);
    assert_eq!(code, 0);
    assert_eq!(v["remainder"], serde_json::json!([]));

    let (code, v, _) = with_input(r#"{"n": 1, "x": [[1, "1"]]}"#, &["solve-h1"]);
    assert_eq!(code, 0);
    assert_eq!(v["y"], serde_json::json!([[1, "1"], [5, "5"], [25, "25"], [125, "125"]]));
    assert_eq!(v["truncated"], true);
}

#[test]
fn module_algebra_twist() {
    let m = std::fs::read_to_string(fixture("example73.json")).unwrap();
    let doc = format!(r#"{{"op": "twist", "c": 1, "module": {m}}}"#);
    let (code, v, _) = with_input(&doc, &["module-algebra"]);
    assert_eq!(code, 0);
    assert_eq!(strs(&v["generic_slopes"]), ["1", "2"]);
    assert_eq!(v["degree"], 3);

    let doc = format!(r#"{{"op": "wedge", "k": 2, "module": {m}}}"#);
    let (code, v, _) = with_input(&doc, &["module-algebra"]);
    assert_eq!(code, 0);
    assert_eq!(v["rank"], 1);
    assert_eq!(strs(&v["generic_slopes"]), ["1"]);

    let doc = format!(r#"{{"op": "transpose", "module": {m}}}"#);
    assert_eq!(with_input(&doc, &["module-algebra"]).0, 3);
}
