use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn quiver(name: &str) -> String {
    root()
        .join("quivers")
        .join(format!("{name}.quiver"))
        .display()
        .to_string()
}

fn coalg(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_coalg")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let (code, out, err) = coalg(&a);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

/// Checks the `required` lists of the shipped schema (top level and config).
fn conforms(report: &Value) {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(root().join("schema/report.schema.json")).unwrap()).unwrap();
    for key in schema["required"].as_array().unwrap() {
        assert!(report.get(key.as_str().unwrap()).is_some(), "missing {key}");
    }
    for key in schema["properties"]["config"]["required"].as_array().unwrap() {
        assert!(
            report["config"].get(key.as_str().unwrap()).is_some(),
            "missing config.{key}"
        );
    }
    assert_eq!(report["schema"], schema["properties"]["schema"]["const"]);
}

#[test]
fn every_command_emits_schema_json() {
    let q = quiver("two_cycle");
    let runs: Vec<Vec<&str>> = vec![
        vec!["gate", "--quiver", &q],
        vec![
            "ext", "--quiver", &q, "--module", "simple:1", "--target", "A", "--trunc", "8",
        ],
        vec!["asreg", "--quiver", &q, "--trunc", "8"],
        vec!["nakayama", "--quiver", &q, "--trunc", "8"],
        vec!["cy", "--quiver", &q, "--trunc", "8"],
        vec!["localcoh", "--quiver", &q, "--trunc", "8"],
        vec!["verify", "--quiver", &q, "--trunc", "8", "--seed", "5"],
    ];
    for args in runs {
        let r = json(&args);
        conforms(&r);
        assert_eq!(r["command"], args[0]);
    }
}

#[test]
fn asreg_table_on_two_cycle() {
    let r = json(&["asreg", "--quiver", &quiver("two_cycle"), "--trunc", "8"]);
    assert_eq!(r["verdict"], "AS-regular of dimension 1");
    let e = r["data"]["comodule_ext"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["simple"] == 0 && e["degree"] == 1)
        .unwrap();
    assert_eq!(e["support"], serde_json::json!([0, 1]));
}

#[test]
fn cy_on_loop_file() {
    let (code, out, _) = coalg(&["cy", "--quiver", &quiver("loop")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("cy: CY-1"));
}

#[test]
fn json_is_deterministic() {
    for cmd in ["verify", "nakayama", "localcoh"] {
        let args = ["--quiver", &quiver("three_cycle"), "--trunc", "9", "--seed", "11"];
        let mut a = vec![cmd];
        a.extend(args);
        assert_eq!(strip_timings(json(&a)), strip_timings(json(&a)), "{cmd}");
    }
}

#[test]
fn exit_codes() {
    let (code, _, err) = coalg(&["gate", "--quiver", &quiver("two_loop")]);
    assert_eq!(code, 3);
    assert!(err.contains("--force"));
    assert_eq!(coalg(&["gate", "--quiver", &quiver("two_loop"), "--force"]).0, 0);
    // negative verdicts are successes
    assert_eq!(coalg(&["asreg", "--quiver", &quiver("kronecker")]).0, 0);
    assert_eq!(coalg(&["nakayama", "--quiver", &quiver("kronecker")]).0, 0);
    let (code, _, err) = coalg(&["asreg", "--quiver", &quiver("three_cycle"), "--trunc", "3"]);
    assert_eq!(code, 4);
    assert!(err.contains("try truncation"), "{err}");
    let (code, _, err) = coalg(&["gate", "--quiver", "/nonexistent.quiver"]);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = coalg(&["ext", "--quiver", &quiver("loop"), "--module", "bogus"]);
    assert_ne!(code, 0);
}

#[test]
fn field_flag_overrides() {
    let r = json(&["asreg", "--quiver", &quiver("loop"), "--field", "F5", "--trunc", "6"]);
    assert_eq!(r["field"], "F5");
    assert_eq!(r["verdict"], "AS-regular of dimension 1");
}
