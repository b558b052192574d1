use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tml(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tml"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("TML_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn trace_exact_writes_one_row_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = tml(dir.path(), &["trace-exact", "--n", "3", "--s", "2", "--dist", "skew12"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("trace-exact.csv")).unwrap();
    assert_eq!(csv, stdout(&o));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("3,2,2.2000000000000000e1,"), "{}", lines[1]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace-exact.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "trace-exact");
    assert_eq!(manifest["parameters"]["dist"], "skew12");
    let files = manifest["output_files"].as_array().unwrap();
    assert_eq!(files.len(), 1);
    assert!(files[0].as_str().unwrap().ends_with("trace-exact.csv"));
}

#[test]
fn dyck_k_at_one_is_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = tml(dir.path(), &["dyck-stats", "--s", "1", "--functional", "K", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().nth(1), Some("1,2.0000000000000000e0,0.0000000000000000e0,1,2"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tml(dir.path(), &["dyck-stats", "--functional", "K"]).status.code(), Some(1));
    assert_eq!(tml(dir.path(), &["trace-mc", "--n", "3", "--s", "2", "--bogus"]).status.code(), Some(1));
    assert_eq!(tml(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(tml(dir.path(), &["trace-exact", "--n", "3", "--s", "2", "--dist", "support=-1,2;probs=0.6667,0.3333"]).status.code(), Some(1));
    assert_eq!(tml(dir.path(), &["trace-mc", "--n", "3", "--s", "2", "--trials", "1"]).status.code(), Some(1));
    assert_eq!(tml(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn json_format() {
    let dir = tempfile::tempdir().unwrap();
    let o = tml(dir.path(), &["--format", "json", "dyck-stats", "--s", "3", "--functional", "pyat"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("dyck-stats.json")).unwrap()).unwrap();
    assert_eq!(v[0]["exact_total"], 9);
}

#[test]
fn verify_gluing_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = tml(dir.path(), &["verify-gluing", "--n", "3", "--s", "2", "--exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    let report = fs::read_to_string(dir.path().join("verify-gluing-report.csv")).unwrap();
    assert!(report.lines().skip(1).all(|l| l.ends_with(",pass")), "{report}");
    let hist = fs::read_to_string(dir.path().join("verify-gluing-histogram.csv")).unwrap();
    let total: usize = hist.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 81);
    let o = tml(dir.path(), &["verify-gluing", "--n", "3", "--s", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn env_var_sets_output_dir_and_flag_wins() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let run = |with_flag: bool| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_tml"));
        if with_flag {
            c.arg("--out").arg(flag_dir.path());
        }
        c.args(["dyck-stats", "--s", "2"]).env("TML_OUTPUT_DIR", env_dir.path()).output().unwrap()
    };
    assert_eq!(run(false).status.code(), Some(0));
    assert!(env_dir.path().join("dyck-stats.csv").exists());
    assert_eq!(run(true).status.code(), Some(0));
    assert!(flag_dir.path().join("dyck-stats.csv").exists());
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["trace-mc", "--n", "5", "--s", "3", "--trials", "500", "--seed", "11"];
    let one = tml(dir.path(), &[&["--threads", "1"][..], &args].concat());
    let four = tml(dir.path(), &[&["--threads", "4"][..], &args].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(tml(dir.path(), &[&["--threads", "0"][..], &args].concat()).status.code(), Some(1));
}
