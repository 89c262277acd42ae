// SPDX-License-Identifier: Apache-2.0

//! The `sfv` binary: exit codes, output formats and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(f: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(f)
        .display()
        .to_string()
}

fn sfv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfv")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn run_args(extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = [
        "run",
        "--design",
        &corpus("gateway.dsn"),
        "--esw",
        &corpus("boot.esw"),
        "--props",
        &corpus("user.prop"),
        "--ip-limit",
        "5",
        "--sub-limit",
        "8",
        "--seed",
        "1",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run(extra: &[&str]) -> Output {
    let a = run_args(extra);
    sfv(&a.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(sfv(&["run"]).status.code(), Some(3));
    assert_eq!(sfv(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(sfv(&["run", "--design", "/nonexistent/x.dsn"]).status.code(), Some(3));
    let o = sfv(&["run", "--design", &corpus("gateway.dsn"), "--props", &corpus("boot.esw")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
    assert_eq!(sfv(&["--help"]).status.code(), Some(0));
}

#[test]
fn corpus_run_is_deterministic_and_fails_semiformally() {
    let a = run(&["--format", "json"]);
    let b = run(&["--format", "json"]);
    assert_eq!(a.status.code(), Some(2));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"], "SEMIFORMAL_FAIL");
    assert_eq!(v["rows"].as_array().unwrap().len(), 7);
}

#[test]
fn report_to_file_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let traces = dir.path().join("traces");
    let o = run(&[
        "--out",
        out.to_str().unwrap(),
        "--dump-trace",
        traces.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("SEMIFORMAL_FAIL"));
    assert!(text.contains("subsystem-3"));
    assert!(traces.exists());
}

#[test]
fn formal_only_is_incomplete() {
    let o = run(&["--formal-only", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"], "FORMAL_INCOMPLETE");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_phase() {
    let a = run_args(&[]);
    let mut args = vec!["phase", "1"];
    args.extend(a[1..].iter().map(String::as_str));
    let o = sfv(&args);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("ranking: cpu0 ram0 can0 ethmac0"), "{s}");
    assert!(s.contains("subsystem-3"));
}

#[test]
fn sra_rank_orders_by_score() {
    let o = sfv(&["sra-rank", "--ip", &corpus("can.net"), "--regmap", &corpus("gateway.map"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v["scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["register"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["can0.MODE", "can0.COMMAND", "can0.ACR", "can0.BTR", "can0.IER"]);
    let scores: Vec<u64> = v["scores"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["score"].as_u64().unwrap())
        .collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn gen_xprop_one_per_register() {
    let o = sfv(&["gen-xprop", "--ip", &corpus("ram.net")]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().filter(|l| l.starts_with("xprop ")).collect();
    assert_eq!(lines.len(), 3, "{s}");
    for r in ["data", "par", "scratch"] {
        assert!(lines.iter().any(|l| l.contains(&format!("known(ram0.{r})")) || l.contains(&format!("known({r})"))));
    }
}

#[test]
fn bmc_on_one_instance() {
    let base = ["bmc", "--design", &corpus("gateway.dsn"), "--props", &corpus("user.prop"), "--scope", "ram0"];
    let o = sfv(&base);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ram_parity"));
    let mut with_x = base.to_vec();
    with_x.extend(["--xprops", "--bound", "10", "--format", "json"]);
    let o = sfv(&with_x);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let scratch = v["properties"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "xprop.ram0.scratch")
        .unwrap();
    assert_eq!(scratch["outcome"], "FAIL");
    assert_eq!(scratch["replayed"], true);
    assert_eq!(sfv(&[&base[..6], &["--scope", "nope"]].concat()).status.code(), Some(3));
}

#[test]
fn sim_prints_register_values() {
    let dir = tempfile::tempdir().unwrap();
    let vcd = dir.path().join("sim.vcd");
    let o = sfv(&[
        "sim",
        "--design",
        &corpus("gateway.dsn"),
        "--esw",
        &corpus("boot.esw"),
        "--cycles",
        "3",
        "--dump-trace",
        vcd.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("can0.MODE = "));
    assert!(std::fs::read_to_string(&vcd).unwrap().contains("$enddefinitions"));
}
