use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn polarlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarlab"))
        .args(args)
        .env_remove("POLARLAB_MAX_ALPHABET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn build(dir: &TempDir, name: &str, extra: &[&str]) -> String {
    let p = path(dir, name);
    let mut args = vec!["channel", "build", "--out", &p];
    args.extend_from_slice(extra);
    let out = polarlab(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    p
}

#[test]
fn group_info_lists_subgroups() {
    let out = polarlab(&["group", "info", "--orders", "2,2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["order"], 4);
    assert_eq!(v["automorphisms"], 6);
    let subs = v["subgroups"].as_array().unwrap();
    assert_eq!(subs.len(), 5);
    let characteristic = subs.iter().filter(|s| s["characteristic"] == true).count();
    assert_eq!(characteristic, 2);
}

#[test]
fn build_every_family_and_inspect() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 5] = [
        &["--family", "qec", "--orders", "4", "--eps", "0.3"],
        &["--family", "qsc", "--orders", "3", "--eps", "0.1"],
        &["--family", "gensym", "--orders", "2,2", "--components", "0.5:0.1,0.5:0.2"],
        &["--family", "homo", "--orders", "4", "--subgroup", "0,2"],
        &["--family", "random", "--orders", "6", "--m", "3", "--seed", "9"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let file = build(&dir, &format!("c{i}.json"), args);
        let out = polarlab(&["channel", "info", &file, "--delta", "0.1"]);
        assert!(out.status.success(), "{}", stderr(&out));
        let v = json(&out);
        let cap = v["capacity_bits"].as_f64().unwrap();
        assert!(cap >= 0.0);
        assert_eq!(v["classifications"].as_array().unwrap().len(), 1);
    }
    let v = json(&polarlab(&["channel", "info", &path(&dir, "c0.json")]));
    assert!((v["erasure_equivalent"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert_eq!(v["automorphic_symmetric"], true);
    let v = json(&polarlab(&["channel", "info", &path(&dir, "c3.json"), "--delta", "0.01"]));
    assert_eq!(v["classifications"][0]["class"], 1);
}

#[test]
fn build_reports_missing_parameters() {
    let out = polarlab(&["channel", "build", "--family", "qec", "--orders", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--eps"));
    let out = polarlab(&["channel", "build", "--family", "homo", "--orders", "4", "--subgroup", "0,1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = polarlab(&["channel", "build", "--family", "qec", "--orders", "4", "--eps", "1.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn transform_matches_erasure_recursion() {
    let dir = TempDir::new().unwrap();
    let file = build(&dir, "q.json", &["--family", "qec", "--orders", "2", "--eps", "0.5"]);
    let out_file = path(&dir, "t.json");
    let out = polarlab(&["transform", &file, "--seq", "-+", "--out", &out_file]);
    assert!(out.status.success(), "{}", stderr(&out));
    let info = json(&polarlab(&["channel", "info", &out_file]));
    assert!((info["erasure_equivalent"].as_f64().unwrap() - 0.5625).abs() < 1e-12);
    let bad = polarlab(&["transform", &file, "--seq", "-x"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn polarize_counts_sum_to_leaves() {
    let dir = TempDir::new().unwrap();
    let file = build(&dir, "q.json", &["--family", "qec", "--orders", "4", "--eps", "0.5"]);
    for method in ["auto", "matrix"] {
        let csv = path(&dir, &format!("{method}.csv"));
        let out = polarlab(&["polarize", &file, "--depth", "10", "--delta", "0.1", "--method", method, "--csv", &csv]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stderr(&out).contains("delta=0.1 n=10"));
        let v = json(&out);
        let total: u64 = v["subgroups"].as_array().unwrap().iter().map(|s| s["count"].as_u64().unwrap()).sum::<u64>()
            + v["unclassified"].as_u64().unwrap();
        assert_eq!(total, 1024);
        let text = std::fs::read_to_string(&csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("seq,I_bits,class,gapI,gapIH"));
        assert_eq!(lines.count(), 1024);
    }
    let a = std::fs::read_to_string(path(&dir, "auto.csv")).unwrap();
    let b = std::fs::read_to_string(path(&dir, "matrix.csv")).unwrap();
    let classes = |t: &str| t.lines().map(|l| l.split(',').nth(2).unwrap().to_string()).collect::<Vec<_>>();
    assert_eq!(classes(&a), classes(&b));
}

#[test]
fn polarize_several_deltas() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "leaves.csv");
    let report = path(&dir, "r.json");
    let out = polarlab(&[
        "polarize", "--family", "qsc", "--orders", "2", "--eps", "0.11", "--depth", "4", "--delta", "0.1,0.05",
        "--csv", &csv, "--out", &report, "--full",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(Path::new(&path(&dir, "leaves.delta0.1.csv")).exists());
    assert!(Path::new(&path(&dir, "leaves.delta0.05.csv")).exists());
    assert_eq!(stderr(&out).lines().filter(|l| l.starts_with("delta=")).count(), 2);
}

#[test]
fn polarize_quantized_is_flagged() {
    let out = polarlab(&[
        "polarize", "--family", "qsc", "--orders", "2", "--eps", "0.11", "--depth", "9", "--delta", "0.1",
        "--quantize", "64",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["approximate"], true);
    assert!(stderr(&out).contains("[approximate]"));
}

#[test]
fn blow_up_exits_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_polarlab"))
        .args(["polarize", "--family", "qsc", "--orders", "2", "--eps", "0.11", "--depth", "8", "--delta", "0.1"])
        .env("POLARLAB_MAX_ALPHABET", "40")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("after prefix"));
    let out = Command::new(env!("CARGO_BIN_EXE_polarlab"))
        .args(["group", "info", "--orders", "2"])
        .env("POLARLAB_MAX_ALPHABET", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_json_is_line_anchored() {
    let dir = TempDir::new().unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{\n  \"orders\": [2],\n  \"num_outputs\": 2,\n  \"rows\": [[1.0, 0.0] [0.0, 1.0]]\n}\n").unwrap();
    let out = polarlab(&["channel", "info", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    let wrong_row = path(&dir, "row.json");
    std::fs::write(&wrong_row, r#"{"orders":[2],"num_outputs":2,"rows":[[0.5,0.6],[0.0,1.0]],"label":"x"}"#).unwrap();
    assert_eq!(polarlab(&["polarize", &wrong_row, "--depth", "2"]).status.code(), Some(1));
    assert_eq!(polarlab(&["channel", "info", &path(&dir, "missing.json")]).status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = path(&dir, "cfg.json");
    std::fs::write(&cfg, r#"{"family":"qec","orders":[2],"eps":0.5,"depth":6,"deltas":[0.1]}"#).unwrap();
    let v = json(&polarlab(&["--config", &cfg, "polarize"]));
    assert_eq!(v["depth"], 6);
    let v = json(&polarlab(&["--config", &cfg, "polarize", "--depth", "7", "--eps", "0.2"]));
    assert_eq!(v["depth"], 7);
    assert_eq!(v["channel"], "qEC(0.2)");

    let unknown = path(&dir, "unknown.json");
    std::fs::write(&unknown, r#"{"family":"qec","colour":"red"}"#).unwrap();
    let out = polarlab(&["--config", &unknown, "polarize"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("colour"));
}

#[test]
fn trend_table() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "trend.csv");
    let out = polarlab(&["trend", "--orders", "4", "--eps", "0.15", "--depth", "4", "--csv", &csv]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(json(&out)["rows"].as_array().unwrap().len(), 4);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,perfect,useless,intermediate,unclassified,max_alphabet\n"));
    assert_eq!(polarlab(&["trend", "--orders", "5", "--eps", "0.1"]).status.code(), Some(1));
}

#[test]
fn verify_z2_passes() {
    let out = polarlab(&["verify", "--suite", "all", "--orders", "2", "--trials", "500"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_single_suite_and_bad_name() {
    let out = polarlab(&["verify", "--suite", "qec-bound", "--orders", "2,2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["outcomes"][0]["cases_checked"], 303);
    assert_eq!(polarlab(&["verify", "--suite", "bogus", "--orders", "2"]).status.code(), Some(1));
}

#[test]
fn jobs_do_not_change_results() {
    let args = ["polarize", "--family", "random", "--orders", "3", "--m", "2", "--seed", "4", "--depth", "3"];
    let one = polarlab(&[&["--jobs", "1"][..], &args].concat());
    let four = polarlab(&[&["--jobs", "4"][..], &args].concat());
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(polarlab(&[&["--jobs", "0"][..], &args].concat()).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(polarlab(&["polarize", "--bogus"]).status.code(), Some(1));
    let help = polarlab(&["polarize", "--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("seq,I_bits,class,gapI,gapIH"));
}
