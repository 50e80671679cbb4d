use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn remindd(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_remindd"))
        .args(args)
        .env_remove("REMIND_LLM_BASE_URL")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn author(data: &Path, message: &str) -> Output {
    remindd(&["author", "--data", data.to_str().unwrap()], &format!("{message}\nyes\n"))
}

#[test]
fn author_saves_a_reminder() {
    let dir = tempfile::tempdir().unwrap();
    let out = author(dir.path(), "Remind me to call my son at 7pm");
    let stdout = text(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("trigger: at(19:00) (time_based)"), "{stdout}");
    let files: Vec<_> = std::fs::read_dir(dir.path().join("reminders")).unwrap().collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn author_without_an_answer_exits_non_zero() {
    let out = remindd(&["author"], "water the plants\n");
    assert!(!out.status.success());
    assert!(text(&out.stdout).contains("When would you like to be reminded?"), "{}", text(&out.stdout));
}

#[test]
fn simulate_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = author(dir.path(), "remind me to turn off the stove when the front door opens and the stove is on");
    assert!(out.status.success(), "{}", text(&out.stdout));
    let trace = root().join("corpus/S3/trace.jsonl");
    let out = remindd(
        &["simulate", "--trace", trace.to_str().unwrap(), "--reminders", dir.path().to_str().unwrap(), "--oracle"],
        "",
    );
    assert!(out.status.success(), "{}", text(&out.stderr));
    let lines: Vec<serde_json::Value> =
        text(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["trigger_kind"], "sensor_based");
    assert!(text(&out.stderr).contains("oracle: 0 mismatching"));
}

#[test]
fn eval_reports_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("report.json");
    let corpus = root().join("corpus");
    let out = remindd(
        &["eval", "--corpus", corpus.to_str().unwrap(), "--date", "2027-03-02", "--json", json.to_str().unwrap()],
        "",
    );
    let stdout = text(&out.stdout);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(stdout.contains("correct              6  (100.0%)"), "{stdout}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn bad_arguments_are_reported() {
    let out = remindd(&["simulate", "--trace", "/nonexistent", "--reminders", "/nonexistent"], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("/nonexistent"));
    let out = remindd(&["serve", "--tick", "fast"], "");
    assert!(!out.status.success());
}
