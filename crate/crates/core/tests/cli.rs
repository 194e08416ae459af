use std::process::Command;

use clap::Parser;
use hecke_core::cli::{element_to_json, parse_element, run, Cli};
use hecke_core::presentation::HeckeAlgebra;
use serde_json::{json, Value};

const TAU1_S: &str = r#"{"u1":[],"t":["1","1"],"i":0,"w1":[1,2],"tau":[1],"w2":[2,1],"u2":[]}"#;

fn hecke(args: &[&str]) -> (i32, String) {
    let mut full = vec!["hecke"];
    full.extend_from_slice(args);
    run(&Cli::try_parse_from(full).unwrap())
}

#[test]
fn relation_nine_product_matches_golden_file() {
    let (code, out) = hecke(&["--m", "2", "--q", "2", "mul", TAU1_S, TAU1_S]);
    assert_eq!(code, 0);
    assert_eq!(out, include_str!("golden/relation9_q2.json"));
}

#[test]
fn oracle_check_on_relation_nine() {
    let (code, out) = hecke(&["--m", "2", "--q", "2", "oracle-check", TAU1_S, TAU1_S]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], json!(true));
    let coeffs: Vec<&str> = v["engine"].as_array().unwrap().iter().map(|t| t["coeff"].as_str().unwrap()).collect();
    assert_eq!(coeffs, ["2", "2"]);
    assert_eq!(v["mass"][0], v["mass"][1]);
}

#[test]
fn relations_check_exits_zero() {
    let (code, out) = hecke(&["--m", "2", "--q", "2", "relations-check"]);
    assert_eq!(code, 0, "{out}");
    let (code, _) = hecke(&["--m", "3", "--q", "3", "relations-check", "--n", "10", "--relation", "9"]);
    assert_eq!(code, 0);
}

#[test]
fn decompose_antidiagonal() {
    let (code, out) = hecke(&["--m", "2", "--q", "2", "decompose", r#"[["0","1"],["t","0"]]"#]);
    assert_eq!(code, 0);
    let expected: Value = serde_json::from_str(TAU1_S).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&out).unwrap(), expected);
}

#[test]
fn output_is_deterministic() {
    let args = ["--m", "3", "--q", "2", "table", "--generators"];
    let (c1, a) = hecke(&args);
    let (c2, b) = hecke(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
}

#[test]
fn element_round_trip() {
    let alg = HeckeAlgebra::with_params(2, 2, 1, 0).unwrap();
    let doc: Value = serde_json::from_str(include_str!("golden/relation9_q2.json")).unwrap();
    let e = parse_element(&doc, &alg, false).unwrap();
    assert_eq!(element_to_json(&e, &alg), doc);
}

#[test]
fn group_algebra_table_passes() {
    let (code, out) = hecke(&["--m", "2", "--q", "2", "group-algebra-table"]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["table"].as_array().unwrap().len(), 36);
}

#[test]
fn tensor_products_through_the_cli() {
    let unit = r#"{"u1":[],"t":["1","1"],"i":0,"w1":[1,2],"tau":[0],"w2":[1,2],"u2":[]}"#;
    let a = format!(r#"[{{"coeff":"1","word":[{TAU1_S},{unit}]}}]"#);
    let b = format!(r#"[{{"coeff":"1","word":[{unit},{TAU1_S}]}}]"#);
    let (code, out) = hecke(&["--r", "2", "mul", &a, &b]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["word"].as_array().unwrap().len(), 2);
}

#[test]
fn binary_reports_failures() {
    let exe = env!("CARGO_BIN_EXE_hecke");
    let bad = r#"{"u1":[],"t":["1","1"],"i":0,"w1":[1,2],"tau":[0],"w2":[2,1],"u2":[]}"#;
    let out = Command::new(exe).args(["--m", "2", "--q", "2", "oracle-check", bad, bad]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kind"], json!("parse"));
    assert!(v["message"].as_str().unwrap().contains("--normalize"));
    let ok = Command::new(exe)
        .args(["--m", "2", "--q", "2", "oracle-check", "--normalize", bad, bad])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let cfg = Command::new(exe).args(["--q", "6", "relations-check"]).output().unwrap();
    assert_eq!(cfg.status.code(), Some(2));
}
