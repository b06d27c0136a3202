use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn corpus(name: &str) -> String {
    fixtures().join("corpus").join(name).display().to_string()
}

fn mid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mid"))
        .args(args)
        .env_remove("MID_COMPRESSOR")
        .env_remove("MID_CACHE")
        .output()
        .expect("spawn mid")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn matrix_json_is_symmetric_with_small_diagonal() {
    let a = corpus("notes-a.txt");
    let b = corpus("notes-b.txt");
    let r = &json(&mid(&["matrix", &a, &b]))["result"];
    let e: Vec<f64> = r["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(e.len(), 4);
    assert_eq!(e[1], e[2]);
    assert!(e[0] < 0.05 && e[3] < 0.05);
    assert!(e[1] > e[0]);
}

#[test]
fn matrix_csv_has_header_and_rows() {
    let a = corpus("log-a.txt");
    let b = corpus("log-b.txt");
    let c = corpus("random-a.bin");
    let out = mid(&["--format", "csv", "matrix", &a, &b, &c]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# mid "));
    assert!(lines[0].contains("compressor=builtin-lz77/2"));
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("label,"));
}

#[test]
fn missing_file_is_an_input_error() {
    let a = corpus("log-a.txt");
    let out = mid(&["matrix", &a, "/nonexistent/file"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/file"));
}

#[test]
fn single_file_matrix_is_a_usage_error() {
    assert_eq!(code(&mid(&["matrix", &corpus("log-a.txt")])), 2);
}

#[test]
fn unknown_scheme_and_suite_are_usage_errors() {
    let a = corpus("log-a.txt");
    let b = corpus("log-b.txt");
    assert_eq!(code(&mid(&["list", &a, &b, "--scheme", "bogus"])), 2);
    assert_eq!(code(&mid(&["check", "--suite", "bogus"])), 2);
    assert_eq!(code(&mid(&["--compressor", "gzip", "matrix", &a, &b])), 2);
}

#[test]
fn copies_have_near_zero_emax() {
    let a = corpus("notes-a.txt");
    let v = json(&mid(&["list", &a, &a, &a]));
    let r = &v["result"]["report"];
    assert_eq!(r["scheme"], "emax");
    let single = json(&mid(&["list", &a, &a, &a, "--scheme", "emin"]));
    assert_eq!(single["result"]["report"]["scheme"], "emin");
    let bits = r["value"].as_f64().unwrap();
    assert!(bits < 0.05 * 12000.0 * 8.0, "emax of copies {bits}");
    assert_eq!(v["budgets"]["m"], 3);
}

#[test]
fn normalized_singleton_is_a_domain_error() {
    let a = corpus("notes-a.txt");
    let out = mid(&["list", &a, "--scheme", "norm-max-sublist"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn counterexample_exceeds_one_under_max_sublist() {
    let x = fixtures().join("counterexample/x.bin").display().to_string();
    let y = fixtures().join("counterexample/y.bin").display().to_string();
    let v = json(&mid(&["list", &x, &y, "--scheme", "norm-max-sublist"]));
    assert!(v["result"]["report"]["value"].as_f64().unwrap() > 1.0);
}

#[test]
fn check_suites_report_pass_through_exit_code() {
    let v = json(&mid(&[
        "check",
        "--suite",
        "metric",
        "--trials",
        "5",
        "--max-len",
        "4096",
    ]));
    assert_eq!(v["result"]["pass"], true);
    let v = json(&mid(&[
        "check",
        "--suite",
        "normalization",
        "--scheme",
        "norm-drop-maximizer",
    ]));
    assert_eq!(v["result"]["pass"], true);
    assert_eq!(v["budgets"]["n"], 10_000);
}

#[test]
fn lab_soi_small() {
    let v = json(&mid(&["lab", "--op", "soi", "--max-len", "6"]));
    assert_eq!(v["budgets"]["machine"], "toy-prefix/1");
    assert!(v["result"]["max_abs"].as_f64().unwrap() <= 3.0);
}

#[test]
fn lab_overlap_round_trips() {
    let v = json(&mid(&[
        "lab",
        "--op",
        "overlap",
        "--m",
        "2",
        "--k1",
        "1",
        "--k2",
        "2",
        "--instances",
        "50",
    ]));
    assert_eq!(v["result"]["pass"], true);
    assert_eq!(v["result"]["instances"].as_array().unwrap().len(), 50);
    assert!(v["result"]["round_trips"].as_u64().unwrap() > 0);
}

#[test]
fn lab_complexity_budgets() {
    let v = json(&mid(&["lab", "--op", "complexity", "--target", "0110", "--L", "0"]));
    assert_eq!(v["result"]["absent"], true);
    let v = json(&mid(&["lab", "--op", "complexity", "--target", "0110"]));
    assert_eq!(v["result"]["absent"], false);
    assert!(v["result"]["complexity"].as_u64().unwrap() > 0);
    assert_eq!(
        code(&mid(&["lab", "--op", "complexity", "--target", "0110", "--L", "30"])),
        4
    );
    assert_eq!(code(&mid(&["lab", "--op", "complexity"])), 2);
    assert_eq!(code(&mid(&["lab", "--op", "complexity", "--target", "012"])), 2);
}

#[test]
fn cluster_two_files_is_one_merge_and_deterministic() {
    let a = corpus("records-a.bin");
    let b = corpus("records-b.bin");
    let v = json(&mid(&["--format", "json", "cluster", &a, &b]));
    assert_eq!(v["result"]["merges"].as_array().unwrap().len(), 1);
    let all: Vec<String> = ["log-a.txt", "log-b.txt", "notes-a.txt", "random-a.bin"]
        .iter()
        .map(|f| corpus(f))
        .collect();
    let mut args = vec!["cluster"];
    args.extend(all.iter().map(String::as_str));
    let first = mid(&args);
    let second = mid(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8(first.stdout).unwrap().trim_end().ends_with(';'));
}

#[test]
fn cache_file_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("sizes.json").display().to_string();
    let out_path = dir.path().join("m.json").display().to_string();
    let a = corpus("log-a.txt");
    let b = corpus("notes-a.txt");
    let first = json(&mid(&["--cache", &cache, "matrix", &a, &b]));
    assert!(std::path::Path::new(&cache).exists());
    let out = mid(&["--cache", &cache, "--out", &out_path, "matrix", &a, &b]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let second: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(first["result"], second["result"]);
}
