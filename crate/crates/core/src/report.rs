//! Component-wise scan reports: canonical JSON, Markdown rendering, exit
//! codes.
//!
//! JSON serialization is canonical: fixed field order per the shipped schema,
//! BTree-ordered maps, UTF-8, newline-terminated. Two semantically identical
//! reports serialize byte-identically, which golden tests rely on. Timestamps
//! come from the `MALSCAN_TIMESTAMP` environment variable when set so test
//! runs are reproducible.

use crate::cvss::Severity;
use crate::lang::LanguageId;
use crate::orchestrator::{ComponentOutcome, OutcomeStatus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";

/// Formal schema document shipped with the tool (JSON Schema draft-07).
pub const REPORT_SCHEMA_JSON: &str = include_str!("../assets/schema/scan_report.v1.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema_version: String,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub config_digest: String,
    pub files: Vec<FileReport>,
    pub totals: Totals,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileReport {
    pub path: String,
    pub language: LanguageId,
    pub content_hash: String,
    pub components: Vec<ComponentOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub components: u64,
    pub analyzed: u64,
    pub skipped: u64,
    pub findings_by_severity: BTreeMap<String, u64>,
}

impl Totals {
    pub fn empty() -> Totals {
        let mut findings_by_severity = BTreeMap::new();
        for sev in [
            Severity::None,
            Severity::Low,
            Severity::Medium,
            Severity::High,
            Severity::Critical,
        ] {
            findings_by_severity.insert(sev.as_str().to_string(), 0);
        }
        Totals {
            components: 0,
            analyzed: 0,
            skipped: 0,
            findings_by_severity,
        }
    }
}

/// Recompute totals from the report body. The stored totals block must match
/// this exactly.
pub fn compute_totals(files: &[FileReport]) -> Totals {
    let mut totals = Totals::empty();
    for file in files {
        for outcome in &file.components {
            totals.components += 1;
            match outcome.status {
                OutcomeStatus::Analyzed => totals.analyzed += 1,
                OutcomeStatus::SkippedLowRisk => totals.skipped += 1,
                OutcomeStatus::DegradedBackendError => {}
            }
            if let Some(detection) = &outcome.detection {
                for finding in &detection.findings {
                    *totals
                        .findings_by_severity
                        .entry(finding.score.severity.as_str().to_string())
                        .or_insert(0) += 1;
                }
            }
        }
    }
    totals
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema_version mismatch: report has {found}, tool expects {expected}")]
    SchemaVersion { found: String, expected: String },
    #[error("report invariant violated: {0}")]
    Invalid(String),
}

impl ScanReport {
    /// Canonical JSON text: pretty-printed with fixed field order,
    /// newline-terminated, stable across runs for identical content.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    /// Parse and structurally validate a stored report.
    pub fn from_json(text: &str) -> Result<ScanReport, ReportError> {
        let report: ScanReport = serde_json::from_str(text)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(ReportError::SchemaVersion {
                found: report.schema_version,
                expected: SCHEMA_VERSION.to_string(),
            });
        }
        report.validate()?;
        Ok(report)
    }

    /// Check the report's internal invariants: totals match a recomputation,
    /// files and components are ordered, findings are sorted.
    pub fn validate(&self) -> Result<(), ReportError> {
        let recomputed = compute_totals(&self.files);
        if recomputed != self.totals {
            return Err(ReportError::Invalid(
                "totals do not match a recomputation from the body".into(),
            ));
        }
        for pair in self.files.windows(2) {
            if pair[0].path > pair[1].path {
                return Err(ReportError::Invalid("files are not sorted by path".into()));
            }
        }
        for file in &self.files {
            for pair in file.components.windows(2) {
                if pair[0].component.span.start > pair[1].component.span.start {
                    return Err(ReportError::Invalid(format!(
                        "components of {} are not sorted by span",
                        file.path
                    )));
                }
            }
            for outcome in &file.components {
                let has_detection = outcome.detection.is_some();
                let analyzed = outcome.status == OutcomeStatus::Analyzed;
                if has_detection != analyzed {
                    return Err(ReportError::Invalid(
                        "detection presence must match analyzed status".into(),
                    ));
                }
                if let Some(detection) = &outcome.detection {
                    detection
                        .validate()
                        .map_err(ReportError::Invalid)?;
                }
            }
        }
        Ok(())
    }

    /// Developer-facing Markdown rendering.
    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let _ = writeln!(md, "# Code Security Scan Report");
        let _ = writeln!(md);
        let _ = writeln!(md, "- Tool version: {}", self.tool_version);
        let _ = writeln!(md, "- Started: {}", self.started_at);
        let _ = writeln!(md, "- Finished: {}", self.finished_at);
        let _ = writeln!(md, "- Config digest: `{}`", self.config_digest);
        let _ = writeln!(
            md,
            "- Components: {} ({} analyzed, {} skipped)",
            self.totals.components, self.totals.analyzed, self.totals.skipped
        );
        let severities: Vec<String> = ["critical", "high", "medium", "low"]
            .iter()
            .filter_map(|sev| {
                let n = self.totals.findings_by_severity.get(*sev).copied().unwrap_or(0);
                (n > 0).then(|| format!("{n} {sev}"))
            })
            .collect();
        if !severities.is_empty() {
            let _ = writeln!(md, "- Findings: {}", severities.join(", "));
        }
        let _ = writeln!(md);

        if self.totals.components == 0 {
            let _ = writeln!(md, "No components analyzed.");
            return md;
        }

        for file in &self.files {
            let _ = writeln!(md, "## `{}` ({})", file.path, file.language);
            let _ = writeln!(md);
            for outcome in &file.components {
                let c = &outcome.component;
                let _ = writeln!(
                    md,
                    "### {} `{}` — bytes {}..{}",
                    c.kind.as_str(),
                    c.name,
                    c.span.start,
                    c.span.end
                );
                let _ = writeln!(md);
                if let Some(summary) = &c.summary {
                    let _ = writeln!(md, "{summary}");
                    let _ = writeln!(md);
                }
                let _ = writeln!(
                    md,
                    "- Prescore: **{:.1}** ({}){}",
                    outcome.prescore.score.value,
                    outcome.prescore.score.severity.display_name(),
                    if outcome.prescore.flagged {
                        " — flagged"
                    } else {
                        ""
                    }
                );
                if !outcome.prescore.indicators.is_empty() {
                    let rules: Vec<&str> = outcome
                        .prescore
                        .indicators
                        .iter()
                        .map(|i| i.rule_id.as_str())
                        .collect();
                    let _ = writeln!(md, "- Indicators: {}", rules.join(", "));
                }
                let status = match outcome.status {
                    OutcomeStatus::Analyzed => "analyzed",
                    OutcomeStatus::SkippedLowRisk => "skipped (low risk)",
                    OutcomeStatus::DegradedBackendError => "degraded (backend error)",
                };
                let _ = writeln!(md, "- Status: {status}");
                if let Some(error) = &outcome.error {
                    let _ = writeln!(md, "- Error: {error}");
                }
                let _ = writeln!(md);

                if let Some(detection) = &outcome.detection {
                    if detection.findings.is_empty() {
                        let _ = writeln!(md, "No findings for this component.");
                        let _ = writeln!(md);
                    }
                    for finding in &detection.findings {
                        let _ = writeln!(
                            md,
                            "#### [{}] {} — {:.1} ({})",
                            finding.category.display_name(),
                            finding.title,
                            finding.score.value,
                            finding.score.severity.display_name()
                        );
                        let _ = writeln!(md);
                        let _ = writeln!(md, "- CVSS vector: `{}`", finding.severity_vector);
                        let _ = writeln!(md, "- Confidence: {}", finding.confidence.as_str());
                        let _ = writeln!(md);
                        let _ = writeln!(md, "{}", finding.explanation);
                        let _ = writeln!(md);
                        let _ = writeln!(md, "**Exploit trace**");
                        let _ = writeln!(md);
                        let _ = writeln!(md, "- Entry point: {}", finding.exploit_trace.entry_point);
                        for (i, step) in finding.exploit_trace.steps.iter().enumerate() {
                            let _ = writeln!(md, "{}. {step}", i + 1);
                        }
                        let _ = writeln!(md, "- Impact: {}", finding.exploit_trace.impact);
                        let _ = writeln!(md);
                        let _ = writeln!(md, "**Remediation**");
                        let _ = writeln!(md);
                        let _ = writeln!(md, "{}", finding.remediation.recommendation);
                        if let Some(snippet) = &finding.remediation.patched_snippet {
                            let _ = writeln!(md);
                            let _ = writeln!(md, "```{}", file.language);
                            let _ = writeln!(md, "{snippet}");
                            let _ = writeln!(md, "```");
                        }
                        let _ = writeln!(md);
                        let _ = writeln!(
                            md,
                            "_{}_",
                            finding.remediation.preserves_functionality_note
                        );
                        let _ = writeln!(md);
                    }
                }
            }
        }
        md
    }
}

/// CI exit code: 0 when no finding reaches `fail_threshold`, 1 when one
/// does, 2 reserved for scan-level errors (mapped by the CLI).
pub fn exit_code(report: &ScanReport, fail_threshold: f64) -> i32 {
    let any = report.files.iter().any(|file| {
        file.components.iter().any(|outcome| {
            outcome
                .detection
                .as_ref()
                .map(|d| d.findings.iter().any(|f| f.score.value >= fail_threshold))
                .unwrap_or(false)
        })
    });
    if any {
        1
    } else {
        0
    }
}

/// RFC 3339 UTC timestamp for report stamping. `MALSCAN_TIMESTAMP`, when set
/// and non-empty, is used verbatim so runs can be made reproducible.
pub fn current_timestamp() -> String {
    if let Ok(v) = std::env::var("MALSCAN_TIMESTAMP") {
        if !v.is_empty() {
            return v;
        }
    }
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format_rfc3339(secs)
}

fn format_rfc3339(secs: u64) -> String {
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (year, month, day) = civil_from_days(days);
    format!(
        "{year:04}-{month:02}-{day:02}T{:02}:{:02}:{:02}Z",
        rem / 3600,
        (rem % 3600) / 60,
        rem % 60
    )
}

// Gregorian date from days since the epoch (proleptic civil calendar).
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_report() -> ScanReport {
        ScanReport {
            schema_version: SCHEMA_VERSION.to_string(),
            tool_version: "0.0.0-test".to_string(),
            started_at: "2026-01-01T00:00:00Z".to_string(),
            finished_at: "2026-01-01T00:00:00Z".to_string(),
            config_digest: "0".repeat(64),
            files: Vec::new(),
            totals: Totals::empty(),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn empty_report_serializes_with_zero_totals() {
        let report = empty_report();
        let json = report.to_json();
        assert!(json.ends_with('\n'));
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["files"], serde_json::json!([]));
        assert_eq!(value["totals"]["components"], 0);
    }

    #[test]
    fn serialize_parse_serialize_is_fixed_point() {
        let report = empty_report();
        let once = report.to_json();
        let twice = ScanReport::from_json(&once).unwrap().to_json();
        assert_eq!(once, twice);
    }

    #[test]
    fn schema_version_mismatch_is_an_error() {
        let mut report = empty_report();
        report.schema_version = "999".to_string();
        let json = report.to_json();
        match ScanReport::from_json(&json) {
            Err(ReportError::SchemaVersion { found, .. }) => assert_eq!(found, "999"),
            other => panic!("expected schema version error, got {other:?}"),
        }
    }

    #[test]
    fn totals_mismatch_is_rejected() {
        let mut report = empty_report();
        report.totals.components = 7;
        assert!(report.validate().is_err());
        let json = report.to_json();
        assert!(ScanReport::from_json(&json).is_err());
    }

    #[test]
    fn empty_report_markdown_mentions_no_components() {
        let md = empty_report().to_markdown();
        assert!(md.contains("No components analyzed"));
    }

    #[test]
    fn exit_codes_respect_strict_threshold_boundary() {
        let report = empty_report();
        assert_eq!(exit_code(&report, 7.0), 0);
    }

    #[test]
    fn rfc3339_formatting() {
        assert_eq!(format_rfc3339(0), "1970-01-01T00:00:00Z");
        assert_eq!(format_rfc3339(1_700_000_000), "2023-11-14T22:13:20Z");
        assert_eq!(format_rfc3339(951_868_800), "2000-03-01T00:00:00Z");
    }

    #[test]
    fn timestamp_env_override_wins() {
        std::env::set_var("MALSCAN_TIMESTAMP", "2026-02-03T04:05:06Z");
        assert_eq!(current_timestamp(), "2026-02-03T04:05:06Z");
        std::env::remove_var("MALSCAN_TIMESTAMP");
    }
}
