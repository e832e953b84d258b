use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use semgest::fixtures::default_root;
use semgest::formats;
use semgest_core::evalstats::{Condition, Question, SurveyRecord};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semgest"))
}

fn case_config(name: &str) -> PathBuf {
    default_root().join("cases").join(name).join("config.toml")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn assign_applies_the_rule() {
    let cfg = case_config("iikara_override");
    let out = run(&["assign", "--config", cfg.to_str().unwrap(), "--phrase", "いいから。"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["nameplate"], "Reject");
    assert!(v["reason"].get("rule").is_some(), "{v}");

    let out = run(&["assign", "--config", cfg.to_str().unwrap(), "--no-rules", "--phrase", "いいから。"]);
    let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["nameplate"], "Good");
}

#[test]
fn stdin_lines_become_phrases() {
    let cfg = case_config("preprocessed_cells");
    let mut child = bin()
        .args(["normalize", "--config", cfg.to_str().unwrap()])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all("a\tお、おう\nb\tあざます 😊\n".as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let lines: Vec<Value> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["source_id"], "a");
    assert!(lines[1]["runs"].as_array().unwrap().iter().any(|r| r["kind"] == "emoji"));
}

#[test]
fn cluster_at_full_threshold_is_one_group() {
    let dir = default_root().join("cases/iikara_override");
    let out = run(&[
        "cluster",
        "--config",
        dir.join("config.toml").to_str().unwrap(),
        "--theta",
        "2.0",
        "--input",
        dir.join("corpus.tsv").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["clusters"].as_array().unwrap().len(), 1);
}

#[test]
fn eval_prints_one_row_per_question() {
    let dir = tempfile::tempdir().unwrap();
    let mut records = Vec::new();
    for p in 1..=6 {
        for q in Question::ALL {
            for clip in 1..=2 {
                for (condition, score) in [(Condition::Matched, 4), (Condition::Shuffled, 3)] {
                    records.push(SurveyRecord { participant: format!("p{p}"), question: q, condition, clip, score });
                }
            }
        }
    }
    let survey = dir.path().join("survey.csv");
    formats::write_survey(std::fs::File::create(&survey).unwrap(), &records).unwrap();
    let json = dir.path().join("results.json");
    let out = run(&["eval", "--survey", survey.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for q in Question::ALL {
        assert_eq!(text.lines().filter(|l| l.contains(q.name())).count(), 1, "{text}");
    }
    let results: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(results.as_array().unwrap().len(), 5);
}

#[test]
fn eval_ranking_skips_gestureless_concepts() {
    let dir = default_root().join("cases/eval_selection");
    let args = |extra: &[&str]| {
        let mut a = vec![
            "eval".to_string(),
            "--config".into(),
            dir.join("config.toml").to_string_lossy().into_owned(),
            "--input".into(),
            dir.join("corpus.tsv").to_string_lossy().into_owned(),
        ];
        a.extend(extra.iter().map(|s| s.to_string()));
        bin().args(a).output().unwrap()
    };
    let text = stdout(&args(&[]));
    assert!(text.lines().next().unwrap().contains("Thank"), "{text}");
    assert!(!text.contains("Awesome"), "{text}");
    let all = stdout(&args(&["--keep-gestureless"]));
    assert!(all.lines().nth(1).unwrap().contains("Awesome"), "{all}");
}

#[test]
fn fixtures_subcommand_reports_each_case() {
    let out = run(&["fixtures"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 8, "{text}");
    assert_eq!(run(&["fixtures", "nope"]).status.code(), Some(1));
}

#[test]
fn exit_codes_separate_usage_and_data_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["assign", "--theta"]).status.code(), Some(2));
    let out = run(&["assign", "--config", "/definitely/missing.toml", "--phrase", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));
    let cfg = case_config("iikara_override");
    let out = run(&["assign", "--config", cfg.to_str().unwrap(), "--tau", "7", "--phrase", "x"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cluster_then_build_then_curate() {
    let dir = tempfile::tempdir().unwrap();
    let case = default_root().join("cases/thank_split_baseline");
    let cfg = case.join("config.toml");
    let corpus = case.join("corpus.tsv");
    let partition = dir.path().join("partition.json");
    let out = run(&[
        "cluster",
        "--config",
        cfg.to_str().unwrap(),
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        partition.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let labels = dir.path().join("labels.tsv");
    std::fs::write(&labels, "t01\tThank\nt07\tあざます\n").unwrap();
    let actions = dir.path().join("actions.jsonl");
    std::fs::write(&actions, "{\"action\":\"merge\",\"a\":0,\"b\":1}\n").unwrap();
    let store = dir.path().join("store.json");
    let out = run(&[
        "concepts-build",
        "--config",
        cfg.to_str().unwrap(),
        "--partition",
        partition.to_str().unwrap(),
        "--corpus",
        corpus.to_str().unwrap(),
        "--labels",
        labels.to_str().unwrap(),
        "--actions",
        actions.to_str().unwrap(),
        "--out",
        store.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let built = formats::load_store(&store).unwrap();
    assert_eq!(built.curation_log.len(), 1);
    assert_eq!(built.set.concepts.len(), 1);
    assert_eq!(built.set.concepts[0].seeds.len(), 20);

    // the built store drives assignment directly
    let out = run(&["assign", "--config", cfg.to_str().unwrap(), "--concepts", store.to_str().unwrap(), "--phrase", "あざます"]);
    let v: Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["reason"], "seed_exact", "{v}");
}
