use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coalition"))
}

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_matches_golden_files() {
    let cases = [
        (vec!["--help"], "tests/golden/help.txt"),
        (vec!["simulate", "--help"], "tests/golden/help_simulate.txt"),
        (vec!["sweep", "--help"], "tests/golden/help_sweep.txt"),
        (vec!["text-run", "--help"], "tests/golden/help_text-run.txt"),
        (vec!["analyze", "--help"], "tests/golden/help_analyze.txt"),
        (vec!["replay", "--help"], "tests/golden/help_replay.txt"),
    ];
    for (args, golden) in cases {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0));
        let want = std::fs::read_to_string(manifest(golden)).unwrap();
        assert_eq!(stdout(&o), want, "{args:?}");
    }
}

#[test]
fn three_agent_fixture_converges() {
    let fixture = manifest("fixtures/three_agents.json");
    let o = run(&[
        "simulate", "--n", "3", "--sigma", "0", "--alpha", "0", "--discipline", "none", "--seed", "1", "--config",
        fixture.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let line: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(line["converged"], true);
    assert_eq!(line["iterations"], 1);
    assert_eq!(line["largest_size"], 2);
}

#[test]
fn fixture_size_must_match_n() {
    let fixture = manifest("fixtures/three_agents.json");
    let o = run(&["simulate", "--n", "4", "--config", fixture.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let o = run(&["sweep", "--config", "missing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));
    assert_eq!(run(&["simulate", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["simulate", "--discipline", "sometimes"]).status.code(), Some(1));
    assert_eq!(run(&["text-run", "--provider", "replay"]).status.code(), Some(1));
}

#[test]
fn http_without_endpoint_is_a_provider_error() {
    let o = bin()
        .args(["text-run", "--provider", "http", "--n", "3"])
        .env_remove("MEDIATOR_LLM_ENDPOINT")
        .env_remove("MEDIATOR_LLM_API_KEY")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("batch.json");
    std::fs::write(
        &cfg,
        r#"{"master_seed": 3, "n": [5, 12], "alpha": [-1, 1], "sigma": 1.5, "repetitions": 3}"#,
    )
    .unwrap();
    let mut files = Vec::new();
    for (k, workers) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{k}"));
        let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        files.push((std::fs::read(out.join("runs.csv")).unwrap(), std::fs::read(out.join("summary.csv")).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(String::from_utf8_lossy(&files[0].0).lines().count(), 13);
}

#[test]
fn text_run_replays_from_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("t.jsonl");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = run(&[
        "text-run", "--n", "5", "--reps", "2", "--mediator-option", "3", "--space", "embedding:32", "--transcript",
        transcript.to_str().unwrap(), "--out", a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["replay", "--transcript", transcript.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["runs.csv", "summary.csv", "runs.jsonl", "projection.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn analyze_matches_reference_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stats.json");
    let input = manifest("tests/data/text_runs.csv");
    let o = run(&[
        "analyze", "--input", input.to_str().unwrap(), "--group-by", "mediator_option", "--metric", "iterations",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stats: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    // scipy.stats.f_oneway and ttest_ind(equal_var=False) on the same column.
    let close = |v: &Value, want: f64| (v.as_f64().unwrap() - want).abs() < 1e-9 * want.abs().max(1.0);
    assert!(close(&stats["anova"]["f"], 1.980804132346782));
    assert!(close(&stats["anova"]["p"], 0.1936985098384432));
    let pairs = stats["pairwise"].as_array().unwrap();
    let want = [
        ("1", "4", -2.493263928871432, 0.2645649373590237),
        ("1", "5", -1.7602893717752481, 0.5297068571208072),
        ("4", "5", -0.2604858476848236, 1.0),
    ];
    assert_eq!(pairs.len(), 3);
    for (p, (a, b, t, cp)) in pairs.iter().zip(want) {
        assert_eq!((p["a"].as_str().unwrap(), p["b"].as_str().unwrap()), (a, b));
        assert!(close(&p["t"], t), "{p}");
        assert!(close(&p["corrected_p"], cp), "{p}");
        assert_eq!(p["significant"], false);
    }
    assert_eq!(stats["posthoc_method"], "bonferroni_welch");
}
