//! End-to-end tests of the `loopcert` binary: exit codes, JSON reports and
//! the files it writes.

mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn loopcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopcert"))
        .args(args)
        .env("LOOPCERT_CORPUS", common::corpus_dir())
        .output()
        .expect("binary runs")
}

fn corpus(rel: &str) -> String {
    common::corpus_dir().join(rel).to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().next().unwrap_or_default())
        .unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("loopcert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn check_reports_the_prototype() {
    let out = loopcert(&["check", "--json", &corpus("figure1.loop")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["discipline"], "ID");
    let phases = r["phases"].as_array().unwrap();
    let src = phases.iter().find(|p| p["name"] == "check-source").unwrap();
    assert_eq!(
        src["payload"]["type"],
        "proc forall n. forall m. ([nat(n), nat(m)] out [nat(add(n, m))])"
    );
    assert!(phases.iter().all(|p| p["name"] != "evaluate"));
}

#[test]
fn eval_uses_command_line_arguments() {
    let out = loopcert(&["eval", "--json", "--args", "4,3", &corpus("is/mult.loop")]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let eval = r["phases"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "evaluate")
        .unwrap()
        .clone();
    assert_eq!(eval["payload"]["value"], serde_json::json!([12]));
    assert_eq!(eval["payload"]["interpreted"], serde_json::json!([12]));
}

#[test]
fn exit_codes_by_failure_kind() {
    let parse = loopcert(&["check", &corpus("negative/parse_error.loop")]);
    assert_eq!(parse.status.code(), Some(1));
    let ty = loopcert(&["check", &corpus("negative/bad_axiom.loop")]);
    assert_eq!(ty.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&ty.stdout).contains("T_AX_I"));
    let missing = loopcert(&["check", "does/not/exist.loop"]);
    assert_ne!(missing.status.code(), Some(0));
}

#[test]
fn translate_writes_a_checkable_term() {
    let src = scratch("fig1.loop");
    std::fs::copy(corpus("figure1.loop"), &src).unwrap();
    let out = loopcert(&["translate", src.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let target = src.with_extension("t");
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("system FD;"));
    let checked = loopcert(&["check", "--json", target.to_str().unwrap()]);
    assert_eq!(checked.status.code(), Some(0));
    assert_eq!(json(&checked)["discipline"], "FD");
}

#[test]
fn fmt_output_reparses() {
    let out = loopcert(&["fmt", &corpus("figure2.loop")]);
    assert_eq!(out.status.code(), Some(0));
    let path = scratch("fig2_fmt.loop");
    std::fs::write(&path, &out.stdout).unwrap();
    let again = loopcert(&["pipeline", path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
}

#[test]
fn whole_corpus_meets_expectations() {
    let out = loopcert(&["pipeline", "--all"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("files as expected"));
}

#[test]
fn fuzz_passes_and_catches_a_planted_bug() {
    let ok = loopcert(&["fuzz", "--json", "--count", "30"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["failed"], 0);
    let bad = loopcert(&["fuzz", "--count", "200", "--mutate-inc"]);
    assert_eq!(bad.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("counterexample"));
}

/// Object keys are declared in the schema definition and required keys are
/// present; recurses through phases, payloads and diagnostics.
fn conforms(v: &Value, schema: &Value, def: &str) {
    let d = &schema["$defs"][def];
    let obj = v.as_object().unwrap_or_else(|| panic!("{def}: not an object: {v}"));
    let props = d["properties"].as_object().unwrap();
    for k in obj.keys() {
        assert!(props.contains_key(k), "{def}: undeclared key {k}");
    }
    for r in d["required"].as_array().into_iter().flatten() {
        assert!(obj.contains_key(r.as_str().unwrap()), "{def}: missing {r}");
    }
    for (key, child) in [("phases", "phase"), ("diagnostics", "diagnostic")] {
        for item in obj.get(key).and_then(Value::as_array).into_iter().flatten() {
            conforms(item, schema, child);
        }
    }
    if let Some(p) = obj.get("payload") {
        conforms(p, schema, "payload");
    }
}

#[test]
fn reports_match_the_schema() {
    let path = common::corpus_dir().join("../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    for file in ["figure2.loop", "is/add.loop", "negative/bad_axiom.loop", "negative/parse_error.loop"] {
        let out = loopcert(&["pipeline", "--json", "--trace", &corpus(file)]);
        conforms(&json(&out), &schema, "pipelineReport");
    }
    let fuzz = loopcert(&["fuzz", "--json", "--count", "200", "--mutate-inc"]);
    let r = json(&fuzz);
    conforms(&r, &schema, "fuzzReport");
    let kind = r["counterexample"]["failure"]["kind"].as_str().unwrap();
    assert!(["source-rejected", "target-rejected", "type-changed", "discrepancy"].contains(&kind));
}
