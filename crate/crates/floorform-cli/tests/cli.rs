//! End-to-end CLI contract tests: exit codes, JSON payloads, determinism,
//! the scan cache, and the quiet mode.

use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_floorform"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn floorform")
}

fn json_of(output: &Output) -> Value {
    serde_json::from_slice(&output.stdout).expect("valid JSON on stdout")
}

#[test]
fn represent_exit_codes_and_payload() {
    let out = run(&["represent", "--form", "1,1,1", "--n", "7"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_of(&out);
    assert_eq!(v["result"]["found"], Value::Bool(false));
    assert_eq!(v["result"]["witness"], Value::Null);
    assert_eq!(v["schema_version"], "1");

    let out = run(&["represent", "--form", "3,3,3", "--n", "2", "--all"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["found"], Value::Bool(true));
    assert_eq!(v["result"]["witness"], serde_json::json!([0, 2, 2]));
    assert_eq!(v["result"]["count"], serde_json::json!(36));

    let out = run(&["represent", "--form", "2,2,2", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["represent", "--form", "3,3", "--n", "1"],
        vec!["represent", "--form", "3,0,3", "--n", "1"],
        vec!["represent", "--n", "1"],
        vec!["scan", "--form", "3,3,3", "--from", "5", "--to", "1"],
        vec!["plan", "--form", "4,7,9", "--n", "0"],
        vec!["plan", "--form", "2,2,2", "--n", "0"],
        vec!["nonsense"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn scan_reports_exceptions() {
    let out = run(&["scan", "--form", "1,1,1", "--from", "0", "--to", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["result"]["exceptions"], serde_json::json!([7, 15, 23, 28]));
    assert_eq!(v["result"]["n_lo"], serde_json::json!(0));
    assert_eq!(v["result"]["n_hi"], serde_json::json!(30));

    let out = run(&["scan", "--form", "3,3,3", "--from", "0", "--to", "1000"]);
    let v = json_of(&out);
    assert_eq!(v["result"]["exceptions"], serde_json::json!([]));
}

#[test]
fn scan_worker_count_does_not_change_output() {
    let strip = |mut v: Value| {
        v["elapsed_ms"] = Value::Null;
        v["result"]["wall_time_ms"] = Value::Null;
        v["parameters"]["jobs"] = Value::Null;
        v
    };
    let base = strip(json_of(&run(&[
        "scan", "--form", "5,7,9", "--from", "0", "--to", "500",
    ])));
    for jobs in ["1", "2", "4"] {
        let v = strip(json_of(&run(&[
            "scan", "--form", "5,7,9", "--from", "0", "--to", "500", "--jobs", jobs,
        ])));
        assert_eq!(base, v, "jobs={jobs}");
    }
}

#[test]
fn identical_invocations_are_byte_identical_modulo_timing() {
    let strip = |mut v: Value| {
        v["elapsed_ms"] = Value::Null;
        v
    };
    let a = strip(json_of(&run(&["plan", "--form", "5,13,21", "--n", "5"])));
    let b = strip(json_of(&run(&["plan", "--form", "5,13,21", "--n", "5"])));
    assert_eq!(a, b);
}

#[test]
fn scan_cache_roundtrip() {
    let dir = std::env::temp_dir().join(format!("floorform-cache-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scan.json");
    let path_str = path.to_str().unwrap();

    let first = run(&[
        "scan", "--form", "2,2,2", "--from", "0", "--to", "20", "--out", path_str,
    ]);
    assert_eq!(first.status.code(), Some(0));
    let file_content = std::fs::read_to_string(&path).unwrap();
    assert_eq!(String::from_utf8_lossy(&first.stdout), file_content);

    // A rerun replays the cached report byte for byte.
    let second = run(&[
        "scan", "--form", "2,2,2", "--from", "0", "--to", "20", "--out", path_str,
    ]);
    assert_eq!(String::from_utf8_lossy(&second.stdout), file_content);

    // A different range ignores the cache and overwrites it.
    let third = run(&[
        "scan", "--form", "2,2,2", "--from", "0", "--to", "10", "--out", path_str,
    ]);
    let v = json_of(&third);
    assert_eq!(v["result"]["n_hi"], serde_json::json!(10));

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn scan_unwritable_out_exits_3() {
    let out = run(&[
        "scan",
        "--form",
        "2,2,2",
        "--from",
        "0",
        "--to",
        "5",
        "--out",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn scan_cap_respects_env_override() {
    let out = bin()
        .args(["scan", "--form", "3,3,3", "--from", "0", "--to", "50"])
        .env("FLOORFORM_MAX_N", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["scan", "--form", "3,3,3", "--from", "0", "--to", "50"])
        .env("FLOORFORM_MAX_N", "100")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn plan_payloads() {
    let v = json_of(&run(&["plan", "--form", "10,10,10", "--n", "4"]));
    assert_eq!(v["result"]["plan"]["case_label"], "m/ord2=1/n-even");
    assert_eq!(v["result"]["plan"]["l"], "41");
    assert_eq!(v["result"]["verification"]["verdict"], "clean");

    let v = json_of(&run(&["plan", "--form", "5,13,21", "--n", "5"]));
    assert_eq!(v["result"]["plan"]["l"], "8597");
    assert_eq!(v["result"]["verification"]["verdict"], "clean");

    let v = json_of(&run(&["plan", "--form", "5,5,5", "--n", "1"]));
    assert_eq!(v["result"]["verification"]["verdict"], "escape_applies");
    assert_eq!(
        v["result"]["verification"]["escape_witness"],
        serde_json::json!([3, 0, 0])
    );
}

#[test]
fn local_payloads() {
    let v = json_of(&run(&[
        "local", "--form", "5,5,5", "--n", "1", "--alpha", "2", "--beta", "0", "--gamma", "0",
        "--prime", "5",
    ]));
    assert_eq!(v["result"][0]["solvable"], Value::Bool(true));

    let v = json_of(&run(&[
        "local", "--form", "10,10,10", "--n", "4", "--alpha", "1", "--beta", "0", "--gamma", "0",
        "--prime", "2",
    ]));
    assert_eq!(v["result"][0]["solvable"], Value::Bool(true));

    let v = json_of(&run(&[
        "local", "--form", "7,7,7", "--n", "0", "--alpha", "0", "--beta", "0", "--gamma", "0",
        "--prime", "3",
    ]));
    assert_eq!(v["result"][0]["solvable"], Value::Bool(true));
    assert_eq!(v["result"][0]["method"], "unimodular_split");
}

#[test]
fn theta_and_obstruct_payloads() {
    let v = json_of(&run(&[
        "theta", "--form", "1,1,1", "--alpha", "0", "--beta", "0", "--gamma", "0", "--max", "1",
    ]));
    assert_eq!(v["result"]["coefficients"], serde_json::json!([1, 6]));

    let v = json_of(&run(&["obstruct", "--form", "10,10,10", "--from", "0", "--to", "30"]));
    let entries = v["result"]["entries"].as_array().unwrap();
    let hit: Vec<u64> = entries.iter().map(|e| e["n"].as_u64().unwrap()).collect();
    assert_eq!(hit, vec![0, 8, 12]); // l = 1, 81, 121
    for e in entries {
        assert_eq!(e["ts"], serde_json::json!([1]));
        assert_eq!(e["escape_applied"], Value::Bool(true));
    }

    let v = json_of(&run(&["obstruct", "--form", "5,5,5", "--from", "0", "--to", "100"]));
    for e in v["result"]["entries"].as_array().unwrap() {
        assert_eq!(e["ts"], serde_json::json!([1]));
        assert_eq!(e["escape_applied"], Value::Bool(true));
    }
}

#[test]
fn local_accepts_negative_residues() {
    let v = json_of(&run(&[
        "local", "--form", "5,7,9", "--n", "1", "--alpha", "-3", "--beta", "0", "--gamma", "2",
        "--prime", "3",
    ]));
    assert_eq!(v["result"][0]["solvable"], Value::Bool(true));
}

#[test]
fn local_reports_search_cap_for_pathological_input() {
    // A prime this large with a non-unit residue is outside the coefficient
    // scope; the engine refuses rather than enumerating forever.
    let out = run(&[
        "local", "--form", "997,5,7", "--n", "1", "--alpha", "997", "--beta", "1", "--gamma",
        "1", "--prime", "997",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn quiet_prints_core_payload_only() {
    let out = run(&["--quiet", "represent", "--form", "3,3,3", "--n", "2"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "[0,2,2]");

    let out = run(&["--quiet", "scan", "--form", "1,1,1", "--from", "0", "--to", "30"]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "[7,15,23,28]"
    );
}
