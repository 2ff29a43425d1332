//! Golden-file pinning of the canonical JSON and Markdown report formats,
//! plus validation of every emitted report against the shipped JSON schema.
//!
//! Regenerate the goldens after an intentional format change with:
//! `MALSCAN_UPDATE_GOLDEN=1 cargo test -p malscan-core --test golden_report`

use malscan_core::backend::RuleBackend;
use malscan_core::orchestrator::{scan_tree, ScanConfig};
use malscan_core::prescore::RuleSet;
use malscan_core::report::{exit_code, ScanReport, REPORT_SCHEMA_JSON};
use std::path::PathBuf;

const SQLI_FILE: &str = r#"import sqlite3


def get_user(user_id):
    conn = sqlite3.connect("app.db")
    cur = conn.cursor()
    cur.execute("SELECT name FROM users WHERE id = " + user_id)
    return cur.fetchone()
"#;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

// Tests in this binary run concurrently but share the process environment;
// timestamp pinning must be serialized.
static ENV_LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());

fn with_fixed_time<T>(f: impl FnOnce() -> T) -> T {
    let guard = ENV_LOCK.lock().unwrap_or_else(|p| p.into_inner());
    std::env::set_var("MALSCAN_TIMESTAMP", "2026-01-01T00:00:00Z");
    let out = f();
    std::env::remove_var("MALSCAN_TIMESTAMP");
    drop(guard);
    out
}

fn fixture_report() -> ScanReport {
    with_fixed_time(|| {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("app.py"), SQLI_FILE).unwrap();
        let cfg = ScanConfig::default();
        let rules = RuleSet::bundled();
        scan_tree(dir.path(), &cfg, &rules, &RuleBackend::new()).unwrap()
    })
}

fn compare_or_update(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var("MALSCAN_UPDATE_GOLDEN").is_ok() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("golden {} missing ({e}); regenerate with MALSCAN_UPDATE_GOLDEN=1", path.display()));
    assert_eq!(actual, expected, "{name} drifted from its golden copy");
}

#[test]
fn json_report_matches_golden() {
    let report = fixture_report();
    compare_or_update("report.json", &report.to_json());
}

#[test]
fn markdown_report_matches_golden() {
    let report = fixture_report();
    let md = report.to_markdown();
    compare_or_update("report.md", &md);
    // Structural expectations independent of the pinned bytes.
    assert!(md.contains("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:N"));
    assert!(md.contains("1. "), "exploit trace must render as a numbered list");
    assert!(md.contains("```python"), "patched snippet must be fenced");
}

#[test]
fn golden_json_round_trips_and_gates_ci() {
    let report = fixture_report();
    let text = report.to_json();
    let parsed = ScanReport::from_json(&text).unwrap();
    assert_eq!(parsed.to_json(), text, "serialize∘parse∘serialize fixed point");
    assert_eq!(exit_code(&parsed, 7.0), 1, "9.1 finding must gate at 7.0");
    assert_eq!(exit_code(&parsed, 9.2), 0);
}

#[test]
fn reports_validate_against_shipped_schema() {
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA_JSON).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");

    let fixture: serde_json::Value = serde_json::from_str(&fixture_report().to_json()).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(&fixture)
        .map(|e| format!("{e}"))
        .collect();
    assert!(errors.is_empty(), "fixture report schema errors: {errors:?}");

    // The full corpus scan exercises every outcome shape.
    let dir = tempfile::tempdir().unwrap();
    malscan_core::eval::build_bundled_corpus(dir.path()).unwrap();
    let cfg = ScanConfig {
        summarize_all: true,
        ..ScanConfig::default()
    };
    let rules = RuleSet::bundled();
    let report = scan_tree(dir.path(), &cfg, &rules, &RuleBackend::new()).unwrap();
    let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| format!("{e}")).collect();
    assert!(errors.is_empty(), "corpus report schema errors: {errors:?}");

    // A corrupted report must fail validation.
    let mut bad = fixture;
    bad["totals"]["components"] = serde_json::json!("seven");
    assert!(!validator.is_valid(&bad));
}

#[test]
fn markdown_omits_empty_snippet_fences() {
    // A finding without patched_snippet renders no code fence: scan a file
    // whose only finding category carries no snippet template.
    let report = with_fixed_time(|| {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("creds.py"),
            "def token():\n    password = \"hunter2-quartz\"\n    return password\n",
        )
        .unwrap();
        let cfg = ScanConfig::default();
        let rules = RuleSet::bundled();
        scan_tree(dir.path(), &cfg, &rules, &RuleBackend::new()).unwrap()
    });
    let md = report.to_markdown();
    assert!(md.contains("Hardcoded Credentials"));
    assert!(!md.contains("```python"), "no snippet means no code fence");
}
