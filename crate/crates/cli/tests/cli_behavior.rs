//! Per-command CLI behavior: golden outputs, rules-check diagnostics,
//! render validation, offline operation.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn malscan() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_malscan"));
    cmd.env("MALSCAN_TIMESTAMP", "2026-01-01T00:00:00Z");
    cmd
}

fn run(args: &[&str]) -> Output {
    malscan().args(args).output().expect("malscan runs")
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/golden")
        .join(name)
}

fn write_sqli_fixture(dir: &Path) {
    std::fs::write(
        dir.join("app.py"),
        "import sqlite3\n\n\ndef get_user(user_id):\n    conn = sqlite3.connect(\"app.db\")\n    cur = conn.cursor()\n    cur.execute(\"SELECT name FROM users WHERE id = \" + user_id)\n    return cur.fetchone()\n",
    )
    .unwrap();
}

#[test]
fn scan_json_output_matches_pinned_golden() {
    let dir = tempfile::tempdir().unwrap();
    write_sqli_fixture(dir.path());
    let out_file = tempfile::NamedTempFile::new().unwrap();
    let out = run(&[
        "scan",
        dir.path().to_str().unwrap(),
        "--backend",
        "rules",
        "--format",
        "json",
        "-o",
        out_file.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "9.1 finding >= default fail threshold 7.0");
    let actual = std::fs::read_to_string(out_file.path()).unwrap();
    let expected = std::fs::read_to_string(golden("report.json")).unwrap();
    assert_eq!(actual, expected, "CLI scan output drifted from the golden report");
}

#[test]
fn render_reproduces_golden_markdown_without_rescanning() {
    let out_file = tempfile::NamedTempFile::new().unwrap();
    let out = run(&[
        "render",
        golden("report.json").to_str().unwrap(),
        "-o",
        out_file.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let actual = std::fs::read_to_string(out_file.path()).unwrap();
    let expected = std::fs::read_to_string(golden("report.md")).unwrap();
    assert_eq!(actual, expected);
}

#[test]
fn render_rejects_truncated_and_mismatched_reports() {
    let golden_json = std::fs::read_to_string(golden("report.json")).unwrap();

    let truncated = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(truncated.path(), &golden_json[..golden_json.len() / 2]).unwrap();
    let out = run(&["render", truncated.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let mismatched = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(
        mismatched.path(),
        golden_json.replace("\"schema_version\": \"1\"", "\"schema_version\": \"99\""),
    )
    .unwrap();
    let out = run(&["render", mismatched.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("schema_version"),
        "stderr must name the version mismatch: {stderr}"
    );
}

#[test]
fn rules_check_reports_counts_and_line_numbers() {
    // Bundled rules.
    let out = run(&["rules-check"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rules loaded"), "{stdout}");

    // Empty file: zero rules, still fine.
    let empty = tempfile::NamedTempFile::new().unwrap();
    let out = run(&["rules-check", empty.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 rules"));

    // Duplicate rule_id: exit 2 and the diagnostic names the line.
    let dup = tempfile::NamedTempFile::new().unwrap();
    let rule = r#"[[rule]]
rule_id = "dup"
category = "backdoor"
pattern = "trigger"
vector = "CVSS:3.1/AV:N/AC:H/PR:N/UI:N/S:C/C:H/I:H/A:H"
description = "x"
"#;
    std::fs::write(dup.path(), format!("{rule}\n{rule}")).unwrap();
    let out = run(&["rules-check", dup.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 8"), "diagnostic must name the line: {stderr}");
    assert!(stderr.contains("duplicate"));
}

#[test]
fn scan_with_rules_backend_is_fully_offline() {
    // Route any accidental HTTP through a dead proxy; a rules-backend scan
    // must still succeed because it performs no network IO at all.
    let dir = tempfile::tempdir().unwrap();
    write_sqli_fixture(dir.path());
    let out = malscan()
        .args(["scan", dir.path().to_str().unwrap(), "--backend", "rules"])
        .env("http_proxy", "http://127.0.0.1:9")
        .env("https_proxy", "http://127.0.0.1:9")
        .env("HTTP_PROXY", "http://127.0.0.1:9")
        .env("HTTPS_PROXY", "http://127.0.0.1:9")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stdout.is_empty());
}

#[test]
fn config_file_values_apply_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    write_sqli_fixture(dir.path());
    let config = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(
        config.path(),
        "fail_threshold = 9.5\nbackend_id = \"rules\"\n",
    )
    .unwrap();

    // Config alone: 9.1 < 9.5 so the gate passes.
    let out = run(&[
        "scan",
        dir.path().to_str().unwrap(),
        "--config",
        config.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    // Flag override wins: 9.1 >= 7.0 fails again.
    let out = run(&[
        "scan",
        dir.path().to_str().unwrap(),
        "--config",
        config.path().to_str().unwrap(),
        "--fail-threshold",
        "7.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_prints_table_and_writes_json() {
    let json_out = tempfile::NamedTempFile::new().unwrap();
    let out = run(&["eval", "--json-out", json_out.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pyvault"));
    assert!(stdout.contains("insecure"));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(json_out.path()).unwrap()).unwrap();
    let projects = value["projects"].as_array().unwrap();
    assert_eq!(projects.len(), 4);
}
