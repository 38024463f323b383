use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ghcft::format::parse_model;
use ghcft::model::validate_model;
use ghcft::oracle::brute_force_cut_sets;
use ghcft::qualitative::{flatten_ghcft, FlattenOptions};
use serde_json::Value;

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn ghcft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghcft"))
        .args(args)
        .env_remove("GHCFT_RTOL")
        .env_remove("GHCFT_ATOL")
        .env_remove("GHCFT_MAX_STEPS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn machine(args: &[&str]) -> Value {
    let mut all = vec!["--output", "machine"];
    all.extend_from_slice(args);
    let o = ghcft(&all);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

const AND_MODEL: &str = "ghcft 1
component k {
  outport o
  cft {
    basic x 1e-4 /h
    basic y 2e-4 /h
    gate g and x y
    ofm f on o from g
  }
}
";

#[test]
fn shipped_models_validate() {
    for entry in fs::read_dir(model("")).unwrap() {
        let path = entry.unwrap().path();
        let o = ghcft(&["validate", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stdout(&o));
    }
}

#[test]
fn mcs_matches_brute_force() {
    let path = model("hybrid_pipeline.ghcft");
    let v = machine(&["mcs", path.to_str().unwrap(), "--top", "c3.c"]);
    let got: Vec<Vec<String>> = serde_json::from_value(v["results"][0]["cut_sets"].clone()).unwrap();

    let doc = parse_model(&fs::read_to_string(&path).unwrap()).unwrap();
    let tree = flatten_ghcft(&doc.system, &"c3.c".parse().unwrap(), &FlattenOptions::default()).unwrap();
    assert_eq!(got, brute_force_cut_sets(&tree).unwrap().cut_sets);

    let text = stdout(&ghcft(&["mcs", path.to_str().unwrap(), "--top", "c3.c"]));
    assert!(text.contains("{c1.x, c2.t_1_2}"));
}

#[test]
fn rate_reproduces_pipeline() {
    let path = model("hybrid_pipeline.ghcft");
    let v = machine(&["rate", path.to_str().unwrap(), "--top", "c3.c"]);
    let rate = v["results"][0]["rate_per_hour"].as_f64().unwrap();
    assert!((rate - 6.66e-7).abs() / 6.66e-7 < 5e-3);

    let o = ghcft(&["rate", path.to_str().unwrap(), "--top", "c3.c", "--units", "perhour"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("6.660e-7"));
}

#[test]
fn machine_output_is_stable() {
    let path = model("emergency_braking.ghcft");
    let a = ghcft(&["--output", "machine", "rate", path.to_str().unwrap()]);
    let b = ghcft(&["--output", "machine", "rate", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn braking_table_lists_both_top_events() {
    let o = ghcft(&["rate", model("emergency_braking.ghcft").to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("E.no_emergency_braking") && text.contains("E.sporadic_braking"));
    assert!(text.contains("{US1.False-negative, US2.False-negative}"));
    assert!(text.contains("Failure rate [FIT]"));
}

#[test]
fn dangling_connection_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ghcft");
    let text = fs::read_to_string(model("hybrid_pipeline.ghcft")).unwrap().replace("c2.o2 -> c3.i2", "c2.o2 -> c9.i2");
    fs::write(&path, text).unwrap();
    let o = ghcft(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("E-CON-ENDPOINT"));
}

#[test]
fn parse_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.ghcft");
    fs::write(&path, "").unwrap();
    let o = ghcft(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("1:1"));
    assert_eq!(ghcft(&["validate", "/no/such/file"]).status.code(), Some(2));
    assert_eq!(ghcft(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn transform_writes_a_fault_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.ghcft");
    let o = ghcft(&[
        "transform",
        model("two_input_cmc.ghcft").to_str().unwrap(),
        "--component",
        "cmc",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains(" and ") && text.contains(" or "));
    let doc = parse_model(&text).unwrap();
    assert!(!validate_model(&doc.system).has_errors());

    let again = ghcft(&["transform", out.to_str().unwrap(), "--component", "cmc"]);
    assert_eq!(again.status.code(), Some(1));
    assert!(stderr(&again).contains("already"));
}

#[test]
fn and_gate_needs_mission_time() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("and.ghcft");
    fs::write(&path, AND_MODEL).unwrap();
    let p = path.to_str().unwrap();
    let o = ghcft(&["rate", p, "--top", "k.f"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mission time"));
    assert_eq!(ghcft(&["rate", p, "--top", "k.f", "--mission-time", "1000"]).status.code(), Some(0));
}

#[test]
fn tolerance_from_environment() {
    let path = model("hybrid_pipeline.ghcft");
    let o = Command::new(env!("CARGO_BIN_EXE_ghcft"))
        .args(["rate", path.to_str().unwrap()])
        .env("GHCFT_RTOL", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("relative tolerance"));
}

#[test]
fn cut_set_cap_is_a_resource_limit() {
    let path = model("hybrid_pipeline.ghcft");
    let o = ghcft(&["mcs", path.to_str().unwrap(), "--top", "c3.c", "--max-cut-sets", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_top_is_a_domain_error() {
    let o = ghcft(&["rate", model("hybrid_pipeline.ghcft").to_str().unwrap(), "--top", "c3.nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_is_reproducible() {
    let path = model("hybrid_pipeline.ghcft");
    let args = ["simulate", path.to_str().unwrap(), "--component", "c2", "--target", "3", "--runs", "20000", "--seed", "5"];
    let a = machine(&args);
    let b = machine(&args);
    assert_eq!(a, b);
    let est = &a["estimate"];
    let (rate, se) = (est["rate_estimate"].as_f64().unwrap(), est["std_error"].as_f64().unwrap());
    let analytic = a["analytic_rate_per_hour"].as_f64().unwrap();
    assert!((rate - analytic).abs() <= 4.0 * se);
}
