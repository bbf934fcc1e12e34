use std::process::{Command, Output};

use serde_json::Value;

const QUARTIC: &str = r#"{"d":4,"c":2,"h":{"0":"-z^4"}}"#;
const CRIT_IN_K: &str = r#"{"d":5,"c":3,"h":{"2":"-3*z"}}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewdyn"))
        .args(args)
        .env_remove("SKEWDYN_VERBOSE")
        .output()
        .expect("binary runs")
}

fn json_result(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["result"].clone()
}

#[test]
fn critical_branches_of_the_cubic_fiber() {
    let r = json_result(&["--map", CRIT_IN_K, "critical"]);
    let mut series: Vec<&str> = r["branches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["series"].as_str().unwrap())
        .collect();
    series.sort();
    assert_eq!(series, ["0", "2*z"]);
    let zero = r["branches"].as_array().unwrap().iter().find(|b| b["series"] == "0").unwrap();
    assert_eq!(zero["escape"]["in_K"]["period"], 1);
}

#[test]
fn green_at_origin_is_exact() {
    let r = json_result(&["--map", QUARTIC, "green", "zeta(0, inf)"]);
    assert_eq!(r["value"], "-2");
}

#[test]
fn envelope_fields() {
    let out = run(&["--map", QUARTIC, "--seed", "7", "graph"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in ["version", "command", "map", "mode", "budgets", "seed", "result"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["command"], "graph");
    assert_eq!(v["seed"], 7);
    let parry: Vec<&str> = v["result"]["parry"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(parry, ["1/4"; 4]);
}

#[test]
fn malformed_series_exits_with_input_error() {
    let out = run(&["--map", r#"{"d":4,"c":2,"h":{"0":"-z^^4"}}"#, "critical"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));
    let out = run(&["--map", QUARTIC, "green", "zeta(z^6/2, 3)"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn hypothesis_failures_exit_2() {
    let out = run(&["--map", CRIT_IN_K, "graph"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn precision_shortfall_exits_3() {
    let out = run(&["--map", QUARTIC, "--precision", "2", "curve", "0,2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_map_is_reported() {
    let out = run(&["graph"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &["--map", QUARTIC, "--seed", "3", "plaques", "--count", "3"][..],
        &["--map", QUARTIC, "--seed", "3", "crosscheck", "--curve-points", "3", "--generic", "3"][..],
        &["--map", QUARTIC, "measure", "--equidistribution", "2"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn plaque_csv_shape() {
    let out = run(&["--map", QUARTIC, "plaques", "--count", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    let header = lines.next().unwrap();
    assert!(header.starts_with("itinerary,weight_num,weight_den"));
    let cols = header.split(',').count();
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').count() == cols));
}

#[test]
fn normal_form_of_a_germ() {
    let r = json_result(&["normalize", r#"{"fz":"z^4","fw":"w^2 - z^4 + z*w^3","M":8}"#]);
    assert_eq!(r["conjugacy_order"], 8);
    assert_eq!(r["h"][0], "-z^4 + O(z^8)");
}

#[test]
fn complex_rate_off_the_curves_is_c() {
    let r = json_result(&["--map", QUARTIC, "rate", "--z", "0.1", "--w", "0.05"]);
    assert_eq!(r["rate"]["verdict"], "c");
}
