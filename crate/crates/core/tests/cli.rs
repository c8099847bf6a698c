//! The `sgrag` binary end to end: run with recording, replay against the
//! log, a small suite, and summarize.

use std::path::Path;
use std::process::Command;

fn sgrag(dir: &Path, args: &[&str]) -> (bool, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sgrag"))
        .current_dir(dir)
        .args(args)
        .env_remove("SGRAG_LLM_BACKEND")
        .output()
        .expect("binary runs");
    (
        out.status.success(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn run_record_then_replay_matches() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, stdout, stderr) = sgrag(
        dir.path(),
        &["run", "--task", "easy_02", "--variant", "erag-feedback", "--distractors", "60", "--record", "store.jsonl", "--out", "out"],
    );
    assert!(ok, "{stderr}");
    let result: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(result["success"], true);
    assert_eq!(result["variant"], "erag_feedback");

    let log = "out/logs/easy_02__kitchen_1__erag_feedback__n60__s0.jsonl";
    assert!(dir.path().join(log).is_file());
    let (ok, _, stderr) = sgrag(
        dir.path(),
        &["replay", "--store", "store.jsonl", "--task", "easy_02", "--variant", "erag_feedback", "--distractors", "60", "--log", log],
    );
    assert!(ok, "{stderr}");
    assert!(stderr.contains("replay matches"), "{stderr}");

    // strict observations ignore distractors, so a different count replays too
    let (ok, _, stderr) = sgrag(
        dir.path(),
        &["replay", "--store", "store.jsonl", "--task", "easy_02", "--variant", "erag_feedback", "--distractors", "500", "--log", log],
    );
    assert!(ok, "{stderr}");

    // another task asks questions the store never saw
    let (ok, stdout, stderr) = sgrag(
        dir.path(),
        &["replay", "--store", "store.jsonl", "--task", "easy_15", "--variant", "erag_feedback", "--log", log],
    );
    assert!(!ok, "{stderr}");
    assert!(stdout.contains("script-exhausted"), "{stdout}");
}

#[test]
fn suite_writes_results_and_summarize_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, stdout, stderr) = sgrag(
        dir.path(),
        &["suite", "--variants", "erag_strict,full_mem", "--tasks", "easy_01,hard_03", "--distractors", "0,50", "--repetitions", "2", "--parallelism", "3", "--out", "grid"],
    );
    assert!(ok, "{stderr}");
    assert!(stdout.contains("erag_strict"));
    let results = std::fs::read_to_string(dir.path().join("grid/results.jsonl")).unwrap();
    assert_eq!(results.lines().count(), 2 * 2 * 2 * 2);
    assert_eq!(std::fs::read_dir(dir.path().join("grid/logs")).unwrap().count(), 16);

    let (ok, csv, _) = sgrag(dir.path(), &["summarize", "grid/results.jsonl", "--csv"]);
    assert!(ok);
    assert_eq!(csv.lines().count(), 1 + 4);
    let (ok, table, _) = sgrag(dir.path(), &["summarize", "grid/results.jsonl"]);
    assert!(ok);
    assert_eq!(table, stdout);
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let (ok, _, stderr) = sgrag(dir.path(), &["run", "--task", "no_such_task"]);
    assert!(!ok);
    assert!(stderr.contains("no_such_task"));
    let (ok, _, _) = sgrag(dir.path(), &["run", "--task", "easy_01", "--k", "0"]);
    assert!(!ok);
    let (ok, _, _) = sgrag(dir.path(), &["summarize", "missing.jsonl"]);
    assert!(!ok);
}
