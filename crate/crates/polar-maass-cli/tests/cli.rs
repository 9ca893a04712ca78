use std::path::PathBuf;
use std::process::{Command, Output};

use polar_maass::pairing::{two_pole_spec, weight_two_basis};
use polar_maass::C64;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polar-maass"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

/// Data rows (non-comment lines after the header) of a CSV table.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn meta(text: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
}

#[test]
fn group_level_11() {
    let o = run(&["group", "--N", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(meta(&text, "mu").as_deref(), Some("12"));
    assert_eq!(meta(&text, "c_N").as_deref(), Some("-1/2"));
    let widths: Vec<String> = rows(&text).iter().map(|r| r[3].clone()).collect();
    assert_eq!(widths, ["1", "11"]);
}

#[test]
fn group_cusp_counts() {
    let text = stdout(&run(&["group", "--N", "1"]));
    assert_eq!(rows(&text).len(), 1);
    let text = stdout(&run(&["group", "--N", "4"]));
    let mut widths: Vec<u64> = rows(&text).iter().map(|r| r[3].parse().unwrap()).collect();
    widths.sort();
    assert_eq!(widths, [1, 1, 4]);
}

#[test]
fn group_rejects_level_zero() {
    assert_eq!(run(&["group", "--N", "0"]).status.code(), Some(2));
}

#[test]
fn coeffs_level_one_reproduces_j() {
    let o = run(&["coeffs", "--N", "1", "--index", "-1", "--j-max", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let row = rows(&text).into_iter().find(|r| r[0] == "1" && r[4] == "hol").expect("n = 1 row");
    let a1: f64 = row[1].parse().unwrap();
    assert!((a1 - 196884.0).abs() < 0.5, "{a1}");
    assert!(meta(&text, "valid_for_im_z_above").is_some());
}

#[test]
fn coeffs_json_output() {
    let o = run(&["coeffs", "--N", "1", "--index", "-1", "--j-max", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["command"], "coeffs");
    assert!(v["rows"].as_array().unwrap().len() >= 3);
}

#[test]
fn empty_spec_gives_header_only_table() {
    let path = tmp_file("empty_spec.json", r#"{"N": 11, "k": 1}"#);
    let o = run(&["coeffs", "--spec", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("n,re,im,tail_estimate,part"));
    assert!(rows(&text).is_empty());
}

#[test]
fn malformed_spec_reports_position() {
    let path = tmp_file("bad_spec.json", "{\"N\": 11,\n  \"k\": ,\n}");
    let o = run(&["coeffs", "--spec", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("column"), "{err}");
}

#[test]
fn unknown_suite_is_usage_error() {
    let o = run(&["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kloosterman_suite_passes() {
    let o = run(&["verify", "kloosterman"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

fn elliptic_spec_json(level: u64, poles: &[(C64, C64)]) -> String {
    let parts: Vec<String> = poles
        .iter()
        .map(|(tau, c)| {
            format!(
                r#"{{"tau_re": {}, "tau_im": {}, "terms": [{{"n": -1, "re": {}, "im": {}}}]}}"#,
                serde_json::to_string(&tau.re).unwrap(),
                serde_json::to_string(&tau.im).unwrap(),
                serde_json::to_string(&c.re).unwrap(),
                serde_json::to_string(&c.im).unwrap()
            )
        })
        .collect();
    format!(r#"{{"N": {level}, "k": 1, "elliptic_parts": [{}]}}"#, parts.join(", "))
}

#[test]
fn certify_two_poles_and_single_pole() {
    let (t1, t2) = (C64::new(0.1, 0.8), C64::new(-0.27, 0.55));
    let g = &weight_two_basis(11, 400).unwrap()[0];
    let spec = two_pole_spec(11, t1, t2, g).unwrap();
    let lambda = spec.elliptic_parts[1].terms[&-1];
    let path = tmp_file("two_pole.json", &elliptic_spec_json(11, &[(t1, C64::new(1.0, 0.0)), (t2, lambda)]));
    let o = run(&["certify", "--spec", path.to_str().unwrap(), "--c-max", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["result"], "PASS");
    assert_eq!(v["certificate"]["pass"], true);

    let path = tmp_file("one_pole.json", &elliptic_spec_json(11, &[(t1, C64::new(1.0, 0.0))]));
    let o = run(&["certify", "--spec", path.to_str().unwrap(), "--c-max", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["certificate"]["pass"], false);
}

#[test]
fn certify_level_one_passes() {
    let path = tmp_file(
        "level_one.json",
        r#"{"N": 1, "k": 1, "cusp_parts": [{"cusp": "inf", "terms": [{"n": -1, "re": 1.0}]}]}"#,
    );
    let o = run(&["certify", "--spec", path.to_str().unwrap(), "--c-max", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn output_is_independent_of_thread_count() {
    let path = tmp_file(
        "threads.json",
        r#"{"N": 11, "k": 1, "cusp_parts": [{"cusp": "inf", "terms": [{"n": -1, "re": 1.0}]}],
            "elliptic_parts": [{"tau_re": 0.1, "tau_im": 0.8, "terms": [{"n": -1, "re": 0.5, "im": -0.2}]}]}"#,
    );
    let p = path.to_str().unwrap();
    let args = ["coeffs", "--spec", p, "--j-max", "6", "--c-max", "300"];
    let one = bin().args(["--threads", "1"]).args(args).output().unwrap();
    let two = bin().args(["--threads", "2"]).args(args).output().unwrap();
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn output_file_is_written() {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("group11.csv");
    let _ = std::fs::remove_file(&out);
    let o = run(&["group", "--N", "11", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows(&text).len(), 2);
}

#[test]
fn all_suites_pass() {
    let o = run(&["verify", "all", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["result"], "PASS");
}
