use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn crnp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crnp"))
        .args(args)
        .env_remove("CRNP_MAX_N")
        .output()
        .expect("spawn crnp")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn analyze_trio_is_persistent() {
    let out = crnp(&["analyze", fixture("net_trio.crn").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["verdict"], "Persistent");
    assert_eq!(doc["semilocking_sets"][0]["rule"], "R1");
}

#[test]
fn analyze_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let dest = dir.path().join("cert.json");
    let out = crnp(&[
        "analyze",
        fixture("net_comb_open.crn").to_str().unwrap(),
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dest).unwrap()).unwrap();
    assert_eq!(doc["decomposition"]["blocks"].as_array().unwrap().len(), 2);
}

#[test]
fn analyze_output_is_deterministic() {
    let path = fixture("net_trio_split.crn");
    let a = crnp(&["analyze", path.to_str().unwrap()]);
    let b = crnp(&["analyze", path.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn conditional_verdict_is_explained() {
    let out = crnp(&["analyze", fixture("a_to_b.crn").to_str().unwrap()]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    if doc["conditional_on_complex_balance"] == true {
        assert!(doc["verdict_text"].as_str().unwrap().contains("conditional"));
        assert!(!doc["caveats"].as_array().unwrap().is_empty());
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_temp(&dir, "bad.crn", "species X1\nX1 -> X9 [k=1]\n");
    let out = crnp(&["analyze", &bad]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn unreadable_input_exits_2() {
    let out = crnp(&["analyze", "/nonexistent/net.crn"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unwritable_output_exits_1() {
    let out = crnp(&["analyze", fixture("net_ab.crn").to_str().unwrap(), "--out", "/nonexistent/dir/cert.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&crnp(&["analyze"])), 2);
    assert_eq!(code(&crnp(&["frobnicate"])), 2);
}

#[test]
fn too_many_species_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let names: Vec<String> = (0..40).map(|i| format!("S{i}")).collect();
    let reactions: Vec<String> = (0..39).map(|i| format!("S{i} <-> S{} [k=1,1]", i + 1)).collect();
    let text = format!("species {}\n{}\n", names.join(" "), reactions.join("\n"));
    let big = write_temp(&dir, "big.crn", &text);
    assert_eq!(code(&crnp(&["analyze", &big])), 4);

    let trio = fixture("net_trio.crn");
    let capped = Command::new(env!("CARGO_BIN_EXE_crnp"))
        .args(["analyze", trio.to_str().unwrap()])
        .env("CRNP_MAX_N", "2")
        .output()
        .unwrap();
    assert_eq!(code(&capped), 4);
}

#[test]
fn explain_reports_rule_and_witness() {
    let trio = fixture("net_trio.crn");
    let yes = crnp(&["explain", trio.to_str().unwrap(), "--set", "X1"]);
    assert_eq!(code(&yes), 0);
    let text = String::from_utf8(yes.stdout).unwrap();
    assert!(text.contains("semilocking: yes; boundary: facet; rule: R1"), "{text}");

    let no = crnp(&["explain", trio.to_str().unwrap(), "--set", "X2"]);
    let text = String::from_utf8(no.stdout).unwrap();
    assert!(text.contains("semilocking: no; witness reaction"), "{text}");

    assert_eq!(code(&crnp(&["explain", trio.to_str().unwrap(), "--set", "Q"])), 2);
}

#[test]
fn simulate_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let rep = dir.path().join("run.json");
    let out = crnp(&[
        "simulate",
        fixture("net_ab.crn").to_str().unwrap(),
        "--init",
        "X1=2,X2=0.5",
        "--tau-override",
        "0.2",
        "--t-end",
        "5",
        "--step",
        "0.01",
        "--out",
        csv.to_str().unwrap(),
        "--report",
        rep.to_str().unwrap(),
        "--every",
        "10",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("t,X1,X2"));
    let last: Vec<f64> = table.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 5.0).abs() < 1e-9);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(rep).unwrap()).unwrap();
    let drift: f64 = doc["conservation_drift"].as_str().unwrap().parse().unwrap();
    assert!(drift < 1e-6);
}

#[test]
fn simulate_rejects_bad_arguments() {
    let ab = fixture("net_ab.crn");
    let ab = ab.to_str().unwrap();
    assert_eq!(code(&crnp(&["simulate", ab, "--init", "X1=1", "--t-end", "1", "--step", "0.1"])), 2);
    assert_eq!(code(&crnp(&["simulate", ab, "--init", "X1=1,X2=1", "--t-end", "1", "--step", "0"])), 2);
    assert_eq!(
        code(&crnp(&["simulate", ab, "--init", "X1=1,X2=1", "--tau-override", "1,2,3", "--t-end", "1", "--step", "0.1"])),
        2
    );
}

#[test]
fn probe_is_reproducible() {
    let ab = fixture("net_ab.crn");
    let args = ["probe", ab.to_str().unwrap(), "--trials", "3", "--t-end", "2", "--step", "0.05", "--seed", "7"];
    let a = crnp(&args);
    let b = crnp(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["trials"].as_array().unwrap().len(), 3);
    assert_eq!(doc["floor_breached"], false);
}
