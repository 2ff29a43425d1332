//! Acceptance suite: one test per release criterion, each printing a
//! PASS line. Run with `cargo test -p malscan-core --test acceptance --
//! --nocapture` to see the lines; CLI-level criteria (exit codes and
//! byte-determinism of the `scan` command) live in the malscan-cli
//! `acceptance_cli` target.

mod common;

use common::{
    check_component_invariants, load_fixture, reference_base_score_tenths, FIXTURE_LANGUAGES,
};
use malscan_core::backend::{
    AnalysisBackend, BackendError, BackendRequest, DetectionReport, RuleBackend,
};
use malscan_core::componentizer::{decompose, fallback_fragment, SourceFile};
use malscan_core::cvss::{base_score, CvssVector};
use malscan_core::eval::{build_bundled_corpus, run_eval, SecurityProfile};
use malscan_core::lang::LanguageId;
use malscan_core::orchestrator::{scan_file, OutcomeStatus, ScanConfig};
use malscan_core::prescore::RuleSet;
use proptest::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

fn pass(id: &str, what: &str) {
    println!("ACCEPTANCE {id}: PASS — {what}");
}

#[test]
fn a01_cvss_equivalence_all_2592_vectors() {
    let start = Instant::now();
    let all = CvssVector::enumerate_all();
    assert_eq!(all.len(), 2592);
    for v in &all {
        let ours = base_score(v).tenths();
        let reference = reference_base_score_tenths(&v.render());
        assert_eq!(
            ours,
            reference,
            "{} scored {:.1}, reference {:.1}",
            v.render(),
            ours as f64 / 10.0,
            reference as f64 / 10.0
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(
        "A01",
        "base_score matches the reference calculator on all 2,592 vectors (<5s)",
    );
}

#[test]
fn a02_cvss_spot_values() {
    let score = |s: &str| base_score(&CvssVector::parse(s).unwrap()).value;
    assert_eq!(score("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"), 9.8);
    assert_eq!(score("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:C/C:H/I:H/A:H"), 10.0);
    assert_eq!(score("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N"), 0.0);
    pass("A02", "CVSS spot values 9.8 / 10.0 / 0.0 exact");
}

#[test]
fn a03_componentizer_fixture_properties() {
    let mut files = 0;
    for (lang, dir, ext) in FIXTURE_LANGUAGES {
        for stem in ["f1", "f2", "f3"] {
            let file = load_fixture(lang, dir, &format!("{stem}.{ext}"));
            let components = decompose(&file).expect("fixtures parse");
            assert!(!components.is_empty());
            check_component_invariants(&file, &components);
            files += 1;
        }
    }
    assert_eq!(files, 42);
    pass(
        "A03",
        "span containment, non-overlap, slice equality, deterministic ids on 42 fixtures (3 per language)",
    );
}

#[test]
fn a04_fallback_totality_property() {
    let cases = 1200usize;
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig {
        cases: cases as u32,
        ..ProptestConfig::default()
    });
    let strategy = (any::<String>(), 1usize..=4096);
    runner
        .run(&strategy, |(content, max_bytes)| {
            let file = SourceFile::new("prop.bin", LanguageId::Unknown, content.clone());
            let fragments = fallback_fragment(&file, max_bytes);
            let joined: String = fragments.iter().map(|f| f.source.as_str()).collect();
            prop_assert_eq!(&joined, &content, "concatenation must reproduce the input");
            // A UTF-8 scalar is at most 4 bytes; at or above that budget no
            // fragment may exceed it.
            if max_bytes >= 4 {
                for f in &fragments {
                    prop_assert!(
                        f.span.len() <= max_bytes,
                        "fragment {} exceeds {}",
                        f.span.len(),
                        max_bytes
                    );
                }
            }
            Ok(())
        })
        .unwrap();
    pass(
        "A04",
        "fallback fragments concatenate exactly and respect max_bytes over 1,200 random inputs",
    );
}

/// Backend wrapper recording which components were dispatched.
#[derive(Default)]
struct RecordingBackend {
    inner: RuleBackend,
    dispatched: Mutex<Vec<String>>,
}

impl AnalysisBackend for RecordingBackend {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn summarize(&self, req: &BackendRequest) -> Result<String, BackendError> {
        self.dispatched.lock().unwrap().push(req.component.id.clone());
        self.inner.summarize(req)
    }

    fn analyze(&self, req: &BackendRequest) -> Result<DetectionReport, BackendError> {
        self.dispatched.lock().unwrap().push(req.component.id.clone());
        self.inner.analyze(req)
    }
}

#[test]
fn a05_routing_soundness_property() {
    // Random files assembled from benign and trigger lines, random
    // thresholds, random force flag: nothing below the threshold may reach
    // the backend unless forced.
    let lines = [
        "def handler(x):",
        "    return x + 1",
        "    value = eval(payload)",
        "    os.system(\"ping \" + host)",
        "    password = \"letmein-zz9\"",
        "    total = sum(items)",
        "x = 1",
        "print(x)",
    ];
    let strategy = (
        proptest::collection::vec(0usize..lines.len(), 1..40),
        0u32..=100,
        any::<bool>(),
    );
    let rules = RuleSet::bundled();
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig {
        cases: 300,
        ..ProptestConfig::default()
    });
    runner
        .run(&strategy, |(picks, threshold_tenths, force)| {
            let content: String = picks.iter().map(|&i| format!("{}\n", lines[i])).collect();
            let file = SourceFile::new("prop.py", LanguageId::Python, content);
            let threshold = threshold_tenths as f64 / 10.0;
            let cfg = ScanConfig {
                flag_threshold: threshold,
                force_analyze_all: force,
                max_parallel: 2,
                ..ScanConfig::default()
            };
            let backend = RecordingBackend::default();
            let scan = scan_file(&file, &cfg, &rules, &backend);
            let dispatched = backend.dispatched.lock().unwrap().clone();
            for outcome in &scan.outcomes {
                let sent = dispatched.iter().any(|id| id == &outcome.component.id);
                if sent && !force {
                    prop_assert!(
                        outcome.prescore.score.value >= threshold,
                        "component below threshold was dispatched"
                    );
                }
                if outcome.status == OutcomeStatus::SkippedLowRisk {
                    prop_assert!(!sent, "skipped component must never be dispatched");
                }
            }
            Ok(())
        })
        .unwrap();
    pass(
        "A05",
        "no component below the flag threshold reaches the backend unless force-analyze (300 random cases)",
    );
}

#[test]
fn a07_corpus_recall_analog() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    build_bundled_corpus(dir.path()).unwrap();
    let cfg = ScanConfig::default();
    let rules = RuleSet::bundled();
    let (result, _) = run_eval(dir.path(), &cfg, &rules, &RuleBackend::new()).unwrap();

    let insecure = result.projects.iter().find(|p| p.project_id == "pyvault").unwrap();
    assert_eq!(insecure.true_positives + insecure.false_negatives, 11);
    assert!(
        insecure.true_positives >= 8,
        "insecure TP {} < 8",
        insecure.true_positives
    );

    let mixed_tp: u64 = result
        .projects
        .iter()
        .filter(|p| p.security_profile == SecurityProfile::Mixed)
        .map(|p| p.true_positives)
        .sum();
    let mixed_total: u64 = result
        .projects
        .iter()
        .filter(|p| p.security_profile == SecurityProfile::Mixed)
        .map(|p| p.true_positives + p.false_negatives)
        .sum();
    assert_eq!(mixed_total, 6);
    assert!(mixed_tp >= 5, "mixed TP {mixed_tp} < 5");

    let secure = result.projects.iter().find(|p| p.project_id == "cstore").unwrap();
    assert!(
        secure.false_positives <= 1,
        "secure FP {} > 1",
        secure.false_positives
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    pass(
        "A07",
        "corpus analog: >=8/11 insecure, >=5/6 mixed, <=1 secure false positive, offline <30s",
    );
}

/// Backend stub asserting the budget contract on every dispatched request.
#[derive(Default)]
struct BudgetAssertingBackend {
    inner: RuleBackend,
    requests: AtomicUsize,
    violations: AtomicUsize,
}

impl AnalysisBackend for BudgetAssertingBackend {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn summarize(&self, req: &BackendRequest) -> Result<String, BackendError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        if req.estimated_tokens() > req.token_budget {
            self.violations.fetch_add(1, Ordering::SeqCst);
        }
        self.inner.summarize(req)
    }

    fn analyze(&self, req: &BackendRequest) -> Result<DetectionReport, BackendError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        if req.estimated_tokens() > req.token_budget {
            self.violations.fetch_add(1, Ordering::SeqCst);
        }
        self.inner.analyze(req)
    }
}

#[test]
fn a08_budget_safety_over_corpus() {
    let dir = tempfile::tempdir().unwrap();
    build_bundled_corpus(dir.path()).unwrap();
    let cfg = ScanConfig {
        token_budget: 3072,
        force_analyze_all: true,
        summarize_all: true,
        ..ScanConfig::default()
    };
    let rules = RuleSet::bundled();
    let backend = BudgetAssertingBackend::default();
    let report =
        malscan_core::orchestrator::scan_tree(dir.path(), &cfg, &rules, &backend).unwrap();
    assert!(report.totals.components > 0);
    let requests = backend.requests.load(Ordering::SeqCst);
    let violations = backend.violations.load(Ordering::SeqCst);
    assert!(requests > 0);
    assert_eq!(violations, 0, "{violations} of {requests} requests exceeded the budget");
    pass(
        "A08",
        "zero dispatched requests exceed the 3072-token budget over the full corpus",
    );
}

#[test]
fn a09_report_schema_totals_and_golden_stability() {
    let schema: serde_json::Value =
        serde_json::from_str(malscan_core::report::REPORT_SCHEMA_JSON).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();

    let dir = tempfile::tempdir().unwrap();
    build_bundled_corpus(dir.path()).unwrap();
    let cfg = ScanConfig::default();
    let rules = RuleSet::bundled();
    let report =
        malscan_core::orchestrator::scan_tree(dir.path(), &cfg, &rules, &RuleBackend::new())
            .unwrap();

    let json = report.to_json();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");

    // Totals recomputation must match exactly.
    let recomputed = malscan_core::report::compute_totals(&report.files);
    assert_eq!(recomputed, report.totals);

    // Golden pair stability: the pinned files still parse, validate, and
    // round-trip byte-identically.
    let golden_dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let golden_json = std::fs::read_to_string(golden_dir.join("report.json")).unwrap();
    let parsed = malscan_core::report::ScanReport::from_json(&golden_json).unwrap();
    assert_eq!(parsed.to_json(), golden_json);
    let golden_value: serde_json::Value = serde_json::from_str(&golden_json).unwrap();
    assert!(validator.is_valid(&golden_value));
    let golden_md = std::fs::read_to_string(golden_dir.join("report.md")).unwrap();
    assert_eq!(parsed.to_markdown(), golden_md);

    pass(
        "A09",
        "every emitted report validates against the shipped schema; totals recompute exactly; golden pair stable",
    );
}
