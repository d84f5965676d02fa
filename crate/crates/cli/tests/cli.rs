use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qaskit"));
    c.env_remove("QASKIT_LIMITS");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_reports_disjoint_witness() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "bad.json",
        r#"{"players":["P1","P2","P3","P4"],"minimal_authorized_sets":[["P1","P2"],["P3","P4"]]}"#,
    );
    let out = run(&["validate", &f]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["result"]["valid"], false);
    assert_eq!(r["result"]["witness"], serde_json::json!([["P1", "P2"], ["P3", "P4"]]));

    let ok = run(&["validate", data("example1.json").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["result"]["maximal"], false);
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(&dir, "u.json", r#"{"players":["A","B"],"minimal_authorized_sets":[["A","C"]]}"#);
    let out = run(&["validate", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown player `C`"));

    let broken = write(&dir, "b.json", "{\"players\": [");
    assert_eq!(run(&["validate", &broken]).status.code(), Some(2));
    assert_eq!(run(&["validate", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));

    let big = (1..=8).map(|i| format!("\"P{i}\"")).collect::<Vec<_>>().join(",");
    let f = write(&dir, "big.json", &format!(r#"{{"players":[{big}],"minimal_authorized_sets":[["P1"]]}}"#));
    let out = run(&["maximalize", "--all", &f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the limit"));
}

#[test]
fn duplicates_warn() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "d.json",
        r#"{"players":["A","B","C"],"minimal_authorized_sets":[["A","B"],["B","A"],["A","C"]]}"#,
    );
    let out = run(&["validate", &f]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning: duplicate set AB ignored"));
    assert_eq!(json(&out)["input"]["minimal_authorized_sets"].as_array().unwrap().len(), 2);
}

#[test]
fn closure_query() {
    let f = data("example1.json");
    let r = json(&run(&["closure", f.to_str().unwrap(), "--set", "P1,P3"]));
    assert_eq!(r["result"]["authorized"], false);
    let r = json(&run(&["closure", f.to_str().unwrap(), "--set", "P1P2P3"]));
    assert_eq!(r["result"]["authorized"], true);
    assert_eq!(r["result"]["contained_minimal_sets"], serde_json::json!([["P1", "P2"]]));
}

#[test]
fn scripted_extension_and_reduction() {
    let f = data("example1.json");
    let out = run(&[
        "maximalize",
        f.to_str().unwrap(),
        "--add",
        "P2P4P5",
        "--add",
        "P1P3P5",
        "--add",
        "P1P3P4",
    ]);
    let r = json(&out);
    assert_eq!(r["result"]["r"], 7);
    assert_eq!(r["steps"].as_array().unwrap().len(), 3);

    let g = data("example2.json");
    let r = json(&run(&["minmax", g.to_str().unwrap(), "--pivot", "P1P3", "--pivot", "P1P4"]));
    assert_eq!(r["steps"][0]["deleted"], serde_json::json!([["P2", "P4", "P5", "P6"]]));
    assert_eq!(r["result"]["corollary"]["minimal_maximal"], true);
}

#[test]
fn grow_adds_player() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "m.json",
        r#"{"players":["P1","P2","P3"],"minimal_authorized_sets":[["P1","P2"],["P1","P3"],["P2","P3"]]}"#,
    );
    let r = json(&run(&["grow", &f, "--player", "P4", "--pivot", "P2P3"]));
    assert_eq!(
        r["result"]["grown"]["minimal_authorized_sets"],
        serde_json::json!([["P1", "P2"], ["P1", "P3"], ["P1", "P4"], ["P2", "P3", "P4"]])
    );
    let out = run(&["grow", data("example1.json").to_str().unwrap(), "--player", "P6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decompose_oracles() {
    let f = data("example1.json");
    let r = json(&run(&["decompose", f.to_str().unwrap()]));
    assert_eq!(r["result"]["l"], 2);
    assert_eq!(r["result"]["blocks"][0]["witness"]["weights"]["P1"], 3);
    assert_eq!(r["result"]["blocks"][0]["witness"]["q"], 11);
    let r = json(&run(&["decompose", f.to_str().unwrap(), "--oracle", "unanimity"]));
    assert_eq!(r["result"]["l"], 4);
    assert_eq!(r["parameters"]["oracle"]["kind"], "unanimity");
}

#[test]
fn synth_plan_round_trips_through_simverify() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let f = data("example1.json");
    let out = run(&[
        "synth",
        f.to_str().unwrap(),
        "--scheme",
        "2",
        "--plan-out",
        plan.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["plan"]["outer"]["k"], 2);
    assert_eq!(r["result"]["verification"]["passed"], true);

    let out = run(&["simverify", plan.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // one component descriptor on its own
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    let desc = doc["components"][0]["descriptor"].clone();
    let d = write(&dir, "desc.json", &desc.to_string());
    let out = run(&["simverify", &d]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["subsets"].as_array().unwrap().len(), 32);

    // give one of P1's shares to P3: the structure no longer matches
    let mut bad = desc.clone();
    let moved = bad["bundling"]["P1"].as_array_mut().unwrap().pop().unwrap();
    bad["bundling"]["P3"] = serde_json::json!([moved]);
    let b = write(&dir, "bad.json", &bad.to_string());
    assert_eq!(run(&["simverify", &b]).status.code(), Some(1));

    let limited = bin()
        .args(["simverify", &d])
        .env("QASKIT_LIMITS", "verify_players=3")
        .output()
        .unwrap();
    assert_eq!(limited.status.code(), Some(2));
}

#[test]
fn synth_scheme1_registers() {
    let f = data("example1.json");
    let out = run(&["synth", f.to_str().unwrap(), "--scheme", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let regs = &r["result"]["plan"]["registers"];
    assert_eq!(regs["P1"].as_array().unwrap().len(), 1);
    assert_eq!(regs["P2"].as_array().unwrap().len(), 2);
    let text = run(&["--text", "synth", f.to_str().unwrap(), "--scheme", "1"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("R(P2) = block 1 shares [3, 4]; block 2 shares [0, 1]"));
}

#[test]
fn reports_are_reproducible() {
    let f = data("example2.json");
    let a = run(&["compare", f.to_str().unwrap()]);
    let b = run(&["--jobs", "1", "compare", f.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["operation"], "compare");
    assert_eq!(r["result"]["trivial"]["verification_count"], 11);
    assert_eq!(r["result"]["ours"]["verification_count"], 6);
}

#[test]
fn repro_is_clean() {
    let out = run(&["--text", "repro-paper"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.ends_with(": ok")).count(), 5);
}

#[test]
fn repro_detects_drift() {
    let dir = tempfile::tempdir().unwrap();
    let bless = run(&["repro-paper", "--bless", dir.path().to_str().unwrap()]);
    assert_eq!(bless.status.code(), Some(0));
    let p = dir.path().join("table1.txt");
    let body = std::fs::read_to_string(&p).unwrap().replace("counts 10 vs 5", "counts 10 vs 4");
    std::fs::write(&p, body).unwrap();
    let out = run(&["--text", "repro-paper", "--expected", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("table1: FAILED (2 differing lines)"));
}
