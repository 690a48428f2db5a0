//! Behavior tests for the `crim` binary: exit codes, flag/config
//! precedence, and the synth -> analyze flow.

use std::path::Path;
use std::process::Command;

fn crim(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_crim"))
        .args(args)
        .output()
        .expect("crim runs");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.code().unwrap_or(-1),
    )
}

fn words(from: usize, count: usize) -> String {
    (from..from + count)
        .map(|i| format!("w{i}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn jsonl_line(id: &str, ts: u64, before: Option<&str>, after: &str) -> String {
    serde_json::json!({
        "id": id,
        "author_name": "A",
        "author_email": "a@x",
        "timestamp": ts,
        "is_merge": false,
        "files": [{"path": "a.txt", "before": before, "after": after, "is_binary": false}],
    })
    .to_string()
}

/// One author: an uncapped first commit, two observed 1-hour intervals at
/// 10 words/h, then a 10-hour gap carrying 1000 words (cap binds).
fn capped_history(dir: &Path) -> std::path::PathBuf {
    let v1 = words(0, 10);
    let v2 = format!("{v1} {}", words(10, 10));
    let v3 = format!("{v2} {}", words(20, 10));
    let v4 = format!("{v3} {}", words(30, 1000));
    let text = [
        jsonl_line("c1", 1_000, None, &v1),
        jsonl_line("c2", 4_600, Some(&v1), &v2),
        jsonl_line("c3", 8_200, Some(&v2), &v3),
        jsonl_line("c4", 44_200, Some(&v3), &v4),
    ]
    .join("\n");
    let path = dir.join("capped.jsonl");
    std::fs::write(&path, text + "\n").unwrap();
    path
}

#[test]
fn insufficient_data_exits_2_with_message() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("one.jsonl");
    std::fs::write(&path, jsonl_line("c1", 1000, None, "hello world") + "\n").unwrap();
    let (_, stderr, code) = crim(&["analyze", "--jsonl", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(
        stderr.contains("insufficient observed samples to fit MBCR"),
        "{stderr}"
    );
}

#[test]
fn input_errors_exit_1() {
    let (_, _, code) = crim(&["analyze", "/no/such/repo"]);
    assert_eq!(code, 1);
    let (_, stderr, code) = crim(&["analyze"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("no input"), "{stderr}");
    let (_, _, code) = crim(&["analyze", "--jsonl", "/no/such.jsonl", "also-a-repo"]);
    assert_eq!(code, 1);
}

#[test]
fn synth_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("a.jsonl");
    let out2 = tmp.path().join("b.jsonl");
    let out3 = tmp.path().join("c.jsonl");
    for (seed, out) in [("9", &out1), ("9", &out2), ("10", &out3)] {
        let (_, _, code) = crim(&[
            "synth", "--seed", seed, "--commits", "25", "--authors", "2", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap()
    );
    assert_ne!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out3).unwrap()
    );
}

#[test]
fn noiseless_synth_report_matches_truth_total() {
    let tmp = tempfile::tempdir().unwrap();
    let history = tmp.path().join("h.jsonl");
    let truth = tmp.path().join("t.csv");
    let (_, _, code) = crim(&[
        "synth", "--seed", "4", "--commits", "150", "--authors", "2", "--out",
        history.to_str().unwrap(), "--truth", truth.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let truth_total: f64 = std::fs::read_to_string(&truth)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();

    let (stdout, _, code) = crim(&[
        "analyze", "--jsonl", history.to_str().unwrap(), "--format", "json",
    ]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let report_total: f64 = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["total_hours"].as_f64().unwrap())
        .sum();

    let rel = (report_total - truth_total).abs() / truth_total;
    assert!(rel <= 1e-6, "report {report_total} vs truth {truth_total}");
}

#[test]
fn explain_shows_derivation_on_stdout() {
    let tmp = tempfile::tempdir().unwrap();
    let path = capped_history(tmp.path());
    let (stdout, _, code) = crim(&[
        "analyze", "--jsonl", path.to_str().unwrap(), "--min-support", "1", "--explain", "c4",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("delta_l:       1000"), "{stdout}");
    assert!(stdout.contains("rho:           10"), "{stdout}");
    assert!(stdout.contains("= delta_l / rho = 1000 / 10"), "{stdout}");
    assert!(stdout.contains("class:         unobserved"), "{stdout}");
    // 100 raw hours hit the 10-hour wall-clock cap.
    assert!(stdout.contains("10.000000 h wall clock, capped"), "{stdout}");
    assert!(stdout.contains("delta_t_hours: 10.000000"), "{stdout}");
    assert!(stdout.contains("capped:        true"), "{stdout}");
}

#[test]
fn cap_flag_controls_imputed_hours() {
    let tmp = tempfile::tempdir().unwrap();
    let path = capped_history(tmp.path());
    let jsonl = path.to_str().unwrap();

    let (capped, _, code) =
        crim(&["analyze", "--jsonl", jsonl, "--min-support", "1", "--format", "json"]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&capped).unwrap();
    assert_eq!(rows[0]["capped_count"], 1);
    // measured 2 h + imputed (1 h first commit + 10 h capped).
    assert!((rows[0]["total_hours"].as_f64().unwrap() - 13.0).abs() < 1e-9);

    let (uncapped, _, code) = crim(&[
        "analyze", "--jsonl", jsonl, "--min-support", "1", "--format", "json", "--no-cap",
    ]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&uncapped).unwrap();
    assert_eq!(rows[0]["capped_count"], 0);
    // The 10-hour gap now carries the full 100 imputed hours.
    assert!((rows[0]["total_hours"].as_f64().unwrap() - 103.0).abs() < 1e-9);
}

#[test]
fn config_file_applies_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let history = tmp.path().join("h.jsonl");
    crim(&[
        "synth", "--seed", "2", "--commits", "40", "--out", history.to_str().unwrap(),
    ]);

    let config = tmp.path().join("crim.conf");
    std::fs::write(
        &config,
        format!(
            "# analysis defaults\njsonl = {}\nformat = json\nbucket = week\n",
            history.display()
        ),
    )
    .unwrap();

    // Input and bucket come from the config file.
    let (stdout, _, code) = crim(&["analyze", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(rows[0]["bucket_kind"], "week");

    // The format flag beats the config file; bucket still applies.
    let (stdout, _, code) = crim(&[
        "analyze", "--config", config.to_str().unwrap(), "--format", "csv",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("author_id,bucket_start"), "{stdout}");
    assert!(stdout.contains(",week,"), "{stdout}");
}

#[test]
fn identity_map_merges_authors() {
    let tmp = tempfile::tempdir().unwrap();
    let history = tmp.path().join("h.jsonl");
    let mut lines = Vec::new();
    let mut content = words(0, 10);
    lines.push(jsonl_line("c1", 1_000, None, &content));
    for i in 1..6u64 {
        let next = format!("{content} {}", words(10 * (i as usize + 1), 10));
        let mut line = jsonl_line(&format!("c{}", i + 1), 1_000 + i * 3_600, Some(&content), &next);
        if i % 2 == 0 {
            line = line.replace("a@x", "alias@y");
        }
        lines.push(line);
        content = next;
    }
    std::fs::write(&history, lines.join("\n") + "\n").unwrap();

    let map = tmp.path().join("identities.json");
    std::fs::write(
        &map,
        r#"[{"email":"a@x","id":"dev"},{"email":"alias@y","id":"dev"}]"#,
    )
    .unwrap();

    let (stdout, _, code) = crim(&[
        "analyze", "--jsonl", history.to_str().unwrap(), "--identity-map",
        map.to_str().unwrap(), "--format", "json",
    ]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["author_id"], "dev");
    assert_eq!(rows[0]["commits"], 6);
}

#[test]
fn model_round_trips_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let fit = tmp.path().join("fit.jsonl");
    let score = tmp.path().join("score.jsonl");
    let model = tmp.path().join("model.json");
    crim(&["synth", "--seed", "31", "--commits", "60", "--out", fit.to_str().unwrap()]);
    crim(&["synth", "--seed", "32", "--commits", "30", "--out", score.to_str().unwrap()]);

    let (_, _, code) = crim(&[
        "analyze", "--jsonl", fit.to_str().unwrap(), "--model-out", model.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(saved["metric"], "levenshtein_words");
    assert!(saved["global_rho"].as_f64().unwrap() > 0.0);

    let (stdout, _, code) = crim(&[
        "analyze", "--jsonl", score.to_str().unwrap(), "--model-in", model.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("author_id,"));

    // Metric mismatch between model and request is an input-side failure.
    let (_, stderr, code) = crim(&[
        "analyze", "--jsonl", score.to_str().unwrap(), "--model-in", model.to_str().unwrap(),
        "--metric", "loc",
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("fit:"), "{stderr}");
}

#[test]
fn profiles_dump_round_trips_as_profile_file() {
    let tmp = tempfile::tempdir().unwrap();
    let (dump, _, code) = crim(&["profiles", "dump"]);
    assert_eq!(code, 0);
    let profiles = tmp.path().join("profiles.json");
    std::fs::write(&profiles, &dump).unwrap();

    let history = tmp.path().join("h.jsonl");
    crim(&["synth", "--seed", "8", "--commits", "30", "--out", history.to_str().unwrap()]);
    let (stdout, _, code) = crim(&[
        "analyze", "--jsonl", history.to_str().unwrap(), "--metric", "cc", "--profiles",
        profiles.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("author_id,"));
}

#[test]
fn since_until_window_the_history() {
    let tmp = tempfile::tempdir().unwrap();
    let path = capped_history(tmp.path());
    // Window keeps c2..c4 only; c2 becomes a first commit.
    let (stdout, _, code) = crim(&[
        "analyze", "--jsonl", path.to_str().unwrap(), "--min-support", "1", "--since", "4600",
        "--format", "json",
    ]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(rows[0]["commits"], 3);
}
