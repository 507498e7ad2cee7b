//! End-to-end checks of the command-line interface: exit codes, report
//! shape, determinism.

use std::process::{Command, Output};

fn cutoff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutoff")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn analyze_diamond_cutoff_json() {
    let out = cutoff(&["analyze", "--mode", "cutoff", "--input", "builtin:diamond", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["problem"], "cutoff");
    assert_eq!(report["answer"], "yes");
    assert_eq!(report["certificates"]["support"].as_array().unwrap().len(), 4);
}

#[test]
fn analyze_symmetric_single_rule_is_no_with_exit_zero() {
    let out = cutoff(&["analyze", "--mode", "symmetric", "--input", "builtin:single-rule"]);
    assert_eq!(out.status.code(), Some(0), "no answers still exit 0");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("answer:   no"), "{text}");
}

#[test]
fn oracle_diamond_reports_witnesses() {
    let out = cutoff(&["oracle", "--input", "builtin:diamond", "--n-max", "10", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["parity_witnesses"]["even"], 2);
    assert_eq!(report["parity_witnesses"]["odd"], 3);
}

#[test]
fn parse_errors_exit_two() {
    let dir = std::env::temp_dir().join("cutoff-cli-test-parse");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.prot");
    std::fs::write(&bad, "[protocol]\nstates: a\nalphabet: x\ninit: nope\n").unwrap();
    let out = cutoff(&["analyze", "--mode", "cutoff", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("undeclared"), "{err}");
}

#[test]
fn wrong_input_kind_exits_two() {
    let out = cutoff(&["analyze", "--mode", "bounded-loss", "--input", "builtin:diamond"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn json_reports_are_deterministic() {
    let args = ["analyze", "--mode", "cutoff", "--input", "builtin:diamond", "--json", "--bound"];
    let mut a = stdout_json(&cutoff(&args));
    let mut b = stdout_json(&cutoff(&args));
    a["timing_ms"] = 0.into();
    b["timing_ms"] = 0.into();
    assert_eq!(a, b);
}

#[test]
fn gen_and_analyze_round_trip() {
    let dir = std::env::temp_dir().join("cutoff-cli-test-gen");
    std::fs::create_dir_all(&dir).unwrap();
    let out_file = dir.join("random.prot");
    let g = cutoff(&[
        "gen",
        "random",
        "--max-states",
        "4",
        "--max-letters",
        "2",
        "--max-rules",
        "6",
        "--seed",
        "11",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(g.status.code(), Some(0));
    let a = cutoff(&["analyze", "--mode", "cutoff", "--input", out_file.to_str().unwrap(), "--json"]);
    assert_eq!(a.status.code(), Some(0));
    let report = stdout_json(&a);
    assert!(report["answer"] == "yes" || report["answer"] == "no");
}

#[test]
fn gen_cvp_circuit_and_bounded_loss_agree() {
    let dir = std::env::temp_dir().join("cutoff-cli-test-cvp");
    std::fs::create_dir_all(&dir).unwrap();
    let circ = dir.join("c.circuit");
    std::fs::write(&circ, "[circuit]\ninputs: x1=1 x2=1\ng1 = and x1 x2\noutput: g1\n").unwrap();
    let prot = dir.join("c.prot");
    let g = cutoff(&[
        "gen",
        "cvp",
        "--circuit",
        circ.to_str().unwrap(),
        "--out",
        prot.to_str().unwrap(),
    ]);
    assert_eq!(g.status.code(), Some(0));
    for mode in ["cutoff", "bounded-loss"] {
        let a = cutoff(&["analyze", "--mode", mode, "--input", prot.to_str().unwrap(), "--json"]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(stdout_json(&a)["answer"], "yes", "mode {mode}");
    }
}

#[test]
fn witness_round_trips_through_validate_run() {
    let dir = std::env::temp_dir().join("cutoff-cli-test-witness");
    std::fs::create_dir_all(&dir).unwrap();
    let out = cutoff(&["analyze", "--mode", "cutoff", "--input", "builtin:relay", "--witness"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let run_part = &text[text.find("[rle-run]").expect("run dumped")..];
    let run_file = dir.join("relay.run");
    std::fs::write(&run_file, run_part).unwrap();
    let v = cutoff(&[
        "validate-run",
        "--input",
        "builtin:relay",
        "--run",
        run_file.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(stdout_json(&v)["answer"], "valid");
}

#[test]
fn validate_run_reports_invalid_runs() {
    let dir = std::env::temp_dir().join("cutoff-cli-test-invalid");
    std::fs::create_dir_all(&dir).unwrap();
    let run_file = dir.join("bad.run");
    std::fs::write(&run_file, "[rle-run]\nstart: p 1\nblock: 2 t\n").unwrap();
    let v = cutoff(&[
        "validate-run",
        "--input",
        "builtin:relay",
        "--run",
        run_file.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(v.status.code(), Some(0));
    let report = stdout_json(&v);
    assert_eq!(report["answer"], "invalid");
}

#[test]
fn corpus_is_consistent_and_deterministic() {
    let args = ["corpus", "--seed", "41", "--count", "25", "--json"];
    let out = cutoff(&args);
    assert_eq!(out.status.code(), Some(0));
    let mut a = stdout_json(&out);
    assert_eq!(a["answer"], "consistent");
    let mut b = stdout_json(&cutoff(&args));
    a["timing_ms"] = 0.into();
    b["timing_ms"] = 0.into();
    assert_eq!(a, b);
}

#[test]
fn leader_modes_work_from_files() {
    let dir = std::env::temp_dir().join("cutoff-cli-test-leader");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("demo.cnf");
    std::fs::write(&f, "p cnf 1 2\n1 1 1 0\n-1 -1 -1 0\n").unwrap();
    let prot = dir.join("demo.lprot");
    let g = cutoff(&["gen", "3sat", "--cnf", f.to_str().unwrap(), "--out", prot.to_str().unwrap()]);
    assert_eq!(g.status.code(), Some(0));
    let a = cutoff(&[
        "analyze",
        "--mode",
        "symmetric-leader",
        "--input",
        prot.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout_json(&a)["answer"], "no");
}
