//! Evaluation harness: scan labeled mini-project corpora and compute
//! detection recall/precision plus remediation-quality tallies.
//!
//! Ground truth lives in per-project `manifest.toml` files (file, category,
//! line-range span hint per seeded vulnerability). Remediation
//! specific/generic labels are manual annotations stored beside the corpus,
//! not computed.

use crate::backend::AnalysisBackend;
use crate::componentizer::Span;
use crate::cvss::CvssScore;
use crate::orchestrator::{scan_tree, ScanConfig, ScanError};
use crate::prescore::{RuleSet, VulnCategory};
use crate::report::ScanReport;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SecurityProfile {
    Secure,
    Insecure,
    Mixed,
}

impl SecurityProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            SecurityProfile::Secure => "secure",
            SecurityProfile::Insecure => "insecure",
            SecurityProfile::Mixed => "mixed",
        }
    }
}

/// One ground-truth vulnerability location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub category: VulnCategory,
    /// Byte span covering the seeded vulnerability (from the manifest's
    /// line-range hint).
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct CorpusManifest {
    pub project_id: String,
    pub security_profile: SecurityProfile,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("manifest references missing file {0}")]
    ManifestMismatch(String),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Deserialize)]
struct ManifestDoc {
    project_id: String,
    security_profile: SecurityProfile,
    #[serde(default)]
    entries: Vec<ManifestEntryDoc>,
}

#[derive(Debug, Deserialize)]
struct ManifestEntryDoc {
    file: String,
    category: String,
    span_hint: SpanHintDoc,
}

#[derive(Debug, Deserialize)]
struct SpanHintDoc {
    start_line: usize,
    end_line: usize,
}

impl CorpusManifest {
    /// Load `manifest.toml` from a project directory, converting line hints
    /// to byte spans against the actual file contents. Every referenced file
    /// must exist.
    pub fn load_from_dir(project_dir: &Path) -> Result<CorpusManifest, EvalError> {
        let manifest_path = project_dir.join("manifest.toml");
        let text = std::fs::read_to_string(&manifest_path).map_err(|source| EvalError::Io {
            path: manifest_path.display().to_string(),
            source,
        })?;
        let doc: ManifestDoc =
            toml::from_str(&text).map_err(|e| EvalError::Manifest(e.to_string()))?;

        let mut entries = Vec::with_capacity(doc.entries.len());
        for entry in doc.entries {
            let category = VulnCategory::parse(&entry.category).ok_or_else(|| {
                EvalError::Manifest(format!("unknown category `{}`", entry.category))
            })?;
            let file_path = project_dir.join(&entry.file);
            if !file_path.is_file() {
                return Err(EvalError::ManifestMismatch(entry.file.clone()));
            }
            let content =
                std::fs::read_to_string(&file_path).map_err(|source| EvalError::Io {
                    path: entry.file.clone(),
                    source,
                })?;
            let span = line_range_to_span(&content, entry.span_hint.start_line, entry.span_hint.end_line)
                .ok_or_else(|| {
                    EvalError::Manifest(format!(
                        "span hint {}..{} is outside {}",
                        entry.span_hint.start_line, entry.span_hint.end_line, entry.file
                    ))
                })?;
            entries.push(ManifestEntry {
                file: entry.file,
                category,
                span,
            });
        }
        if doc.security_profile == SecurityProfile::Secure && !entries.is_empty() {
            return Err(EvalError::Manifest(
                "secure projects must have zero entries".into(),
            ));
        }
        Ok(CorpusManifest {
            project_id: doc.project_id,
            security_profile: doc.security_profile,
            entries,
        })
    }
}

/// Byte span of an inclusive 1-based line range.
fn line_range_to_span(content: &str, start_line: usize, end_line: usize) -> Option<Span> {
    if start_line == 0 || end_line < start_line {
        return None;
    }
    let mut starts = vec![0usize];
    for (i, b) in content.bytes().enumerate() {
        if b == b'\n' {
            starts.push(i + 1);
        }
    }
    let line_count = if content.ends_with('\n') {
        starts.len() - 1
    } else {
        starts.len()
    };
    if start_line > line_count {
        return None;
    }
    let start = starts[start_line - 1];
    let end = if end_line >= line_count {
        content.len()
    } else {
        starts[end_line]
    };
    Some(Span { start, end })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemediationTally {
    pub specific: u64,
    pub generic: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectEval {
    pub project_id: String,
    pub security_profile: SecurityProfile,
    pub true_positives: u64,
    pub false_negatives: u64,
    pub false_positives: u64,
    pub recall: f64,
    pub precision: f64,
    pub remediation: RemediationTally,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub projects: Vec<ProjectEval>,
    pub remediation_by_profile: BTreeMap<String, RemediationTally>,
}

/// Ratio with the 0/0 case defined as 1.0.
fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone)]
struct CandidateFinding {
    file: String,
    category: VulnCategory,
    span: Span,
    score: CvssScore,
}

/// Match report findings against ground truth: a finding matches an entry
/// iff same file, same category, and the finding's component span overlaps
/// the entry's span hint. Matching is one-to-one, greedy by score
/// descending. Unmatched findings are false positives; unmatched entries
/// are false negatives.
pub fn match_findings(
    report: &ScanReport,
    manifest: &CorpusManifest,
) -> Result<ProjectEval, EvalError> {
    let report_paths: Vec<&str> = report.files.iter().map(|f| f.path.as_str()).collect();
    for entry in &manifest.entries {
        if !report_paths.contains(&entry.file.as_str()) {
            return Err(EvalError::ManifestMismatch(entry.file.clone()));
        }
    }

    let mut candidates = Vec::new();
    for file in &report.files {
        for outcome in &file.components {
            if let Some(detection) = &outcome.detection {
                for finding in &detection.findings {
                    candidates.push(CandidateFinding {
                        file: file.path.clone(),
                        category: finding.category,
                        span: outcome.component.span,
                        score: finding.score,
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| a.file.cmp(&b.file))
            .then_with(|| a.category.as_str().cmp(b.category.as_str()))
            .then_with(|| a.span.start.cmp(&b.span.start))
    });

    let mut matched_entry: Vec<Option<usize>> = vec![None; manifest.entries.len()];
    let mut true_positives = 0u64;
    let mut false_positives = 0u64;
    let mut matched_pairs: Vec<(usize, CandidateFinding)> = Vec::new();
    for candidate in candidates {
        let slot = manifest.entries.iter().enumerate().find(|(i, entry)| {
            matched_entry[*i].is_none()
                && entry.file == candidate.file
                && entry.category == candidate.category
                && entry.span.overlaps(&candidate.span)
        });
        match slot {
            Some((i, _)) => {
                matched_entry[i] = Some(matched_pairs.len());
                matched_pairs.push((i, candidate));
                true_positives += 1;
            }
            None => false_positives += 1,
        }
    }
    let false_negatives = matched_entry.iter().filter(|m| m.is_none()).count() as u64;

    Ok(ProjectEval {
        project_id: manifest.project_id.clone(),
        security_profile: manifest.security_profile,
        true_positives,
        false_negatives,
        false_positives,
        recall: ratio(true_positives, true_positives + false_negatives),
        precision: ratio(true_positives, true_positives + false_positives),
        remediation: RemediationTally::default(),
    })
}

/// Manual remediation-quality labels stored beside the corpus.
#[derive(Debug, Clone, Default)]
pub struct Annotations {
    labels: BTreeMap<(String, String, String), String>,
}

#[derive(Debug, Deserialize)]
struct AnnotationsDoc {
    #[serde(default)]
    annotation: Vec<AnnotationDoc>,
}

#[derive(Debug, Deserialize)]
struct AnnotationDoc {
    project: String,
    file: String,
    category: String,
    quality: String,
}

impl Annotations {
    pub fn load(text: &str) -> Result<Annotations, EvalError> {
        let doc: AnnotationsDoc =
            toml::from_str(text).map_err(|e| EvalError::Manifest(e.to_string()))?;
        let mut labels = BTreeMap::new();
        for a in doc.annotation {
            if a.quality != "specific" && a.quality != "generic" {
                return Err(EvalError::Manifest(format!(
                    "annotation quality must be specific|generic, got `{}`",
                    a.quality
                )));
            }
            labels.insert((a.project, a.file, a.category), a.quality);
        }
        Ok(Annotations { labels })
    }

    fn lookup(&self, project: &str, file: &str, category: VulnCategory) -> Option<&str> {
        self.labels
            .get(&(
                project.to_string(),
                file.to_string(),
                category.as_str().to_string(),
            ))
            .map(|s| s.as_str())
    }
}

/// Tally remediation labels over the matched (true-positive) entries.
fn tally_remediation(
    manifest: &CorpusManifest,
    eval: &ProjectEval,
    report: &ScanReport,
    annotations: &Annotations,
) -> RemediationTally {
    // Re-run the matching to know which entries were hit; cheaper than
    // exposing match internals.
    let mut tally = RemediationTally::default();
    let matched = matched_entries(report, manifest);
    debug_assert_eq!(matched.len() as u64, eval.true_positives);
    for idx in matched {
        let entry = &manifest.entries[idx];
        match annotations.lookup(&manifest.project_id, &entry.file, entry.category) {
            Some("specific") => tally.specific += 1,
            _ => tally.generic += 1,
        }
    }
    tally
}

fn matched_entries(report: &ScanReport, manifest: &CorpusManifest) -> Vec<usize> {
    let mut candidates = Vec::new();
    for file in &report.files {
        for outcome in &file.components {
            if let Some(detection) = &outcome.detection {
                for finding in &detection.findings {
                    candidates.push(CandidateFinding {
                        file: file.path.clone(),
                        category: finding.category,
                        span: outcome.component.span,
                        score: finding.score,
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| a.file.cmp(&b.file))
            .then_with(|| a.category.as_str().cmp(b.category.as_str()))
            .then_with(|| a.span.start.cmp(&b.span.start))
    });
    let mut taken = vec![false; manifest.entries.len()];
    let mut out = Vec::new();
    for candidate in candidates {
        if let Some((i, _)) = manifest.entries.iter().enumerate().find(|(i, entry)| {
            !taken[*i]
                && entry.file == candidate.file
                && entry.category == candidate.category
                && entry.span.overlaps(&candidate.span)
        }) {
            taken[i] = true;
            out.push(i);
        }
    }
    out
}

/// Scan every project in a corpus directory and evaluate against its
/// manifest. Returns the result plus each project's scan report.
pub fn run_eval(
    corpus_dir: &Path,
    cfg: &ScanConfig,
    rules: &RuleSet,
    backend: &dyn AnalysisBackend,
) -> Result<(EvalResult, Vec<(String, ScanReport)>), EvalError> {
    let annotations_path = corpus_dir.join("annotations.toml");
    let annotations = if annotations_path.is_file() {
        let text = std::fs::read_to_string(&annotations_path).map_err(|source| EvalError::Io {
            path: annotations_path.display().to_string(),
            source,
        })?;
        Annotations::load(&text)?
    } else {
        Annotations::default()
    };

    let mut project_dirs: Vec<_> = std::fs::read_dir(corpus_dir)
        .map_err(|source| EvalError::Io {
            path: corpus_dir.display().to_string(),
            source,
        })?
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .map(|e| e.path())
        .collect();
    project_dirs.sort();

    let mut projects = Vec::new();
    let mut reports = Vec::new();
    let mut by_profile: BTreeMap<String, RemediationTally> = BTreeMap::new();
    for dir in project_dirs {
        let manifest = CorpusManifest::load_from_dir(&dir)?;
        let mut project_cfg = cfg.clone();
        project_cfg.exclude.push("manifest.toml".to_string());
        let report = scan_tree(&dir, &project_cfg, rules, backend)?;
        let mut eval = match_findings(&report, &manifest)?;
        eval.remediation = tally_remediation(&manifest, &eval, &report, &annotations);
        let profile = by_profile
            .entry(manifest.security_profile.as_str().to_string())
            .or_default();
        profile.specific += eval.remediation.specific;
        profile.generic += eval.remediation.generic;
        reports.push((manifest.project_id.clone(), report));
        projects.push(eval);
    }

    Ok((
        EvalResult {
            projects,
            remediation_by_profile: by_profile,
        },
        reports,
    ))
}

/// Files of the bundled corpus, embedded so `eval` runs without checkouts.
pub const BUNDLED_CORPUS: &[(&str, &str)] = &[
    ("pyvault/manifest.toml", include_str!("../assets/corpus/pyvault/manifest.toml")),
    ("pyvault/app.py", include_str!("../assets/corpus/pyvault/app.py")),
    ("pyvault/auth.py", include_str!("../assets/corpus/pyvault/auth.py")),
    ("pyvault/storage.py", include_str!("../assets/corpus/pyvault/storage.py")),
    ("pyvault/jobs.py", include_str!("../assets/corpus/pyvault/jobs.py")),
    ("pyvault/utils.py", include_str!("../assets/corpus/pyvault/utils.py")),
    ("cstore/manifest.toml", include_str!("../assets/corpus/cstore/manifest.toml")),
    ("cstore/config.c", include_str!("../assets/corpus/cstore/config.c")),
    ("cstore/list.c", include_str!("../assets/corpus/cstore/list.c")),
    ("cstore/log.c", include_str!("../assets/corpus/cstore/log.c")),
    ("cstore/checksum.c", include_str!("../assets/corpus/cstore/checksum.c")),
    ("cstore/main.c", include_str!("../assets/corpus/cstore/main.c")),
    ("javatrack/manifest.toml", include_str!("../assets/corpus/javatrack/manifest.toml")),
    ("javatrack/Server.java", include_str!("../assets/corpus/javatrack/Server.java")),
    ("javatrack/UserDao.java", include_str!("../assets/corpus/javatrack/UserDao.java")),
    (
        "javatrack/SessionStore.java",
        include_str!("../assets/corpus/javatrack/SessionStore.java"),
    ),
    ("javatrack/AuditJob.java", include_str!("../assets/corpus/javatrack/AuditJob.java")),
    ("javatrack/Util.java", include_str!("../assets/corpus/javatrack/Util.java")),
    ("jsnotes/manifest.toml", include_str!("../assets/corpus/jsnotes/manifest.toml")),
    ("jsnotes/server.js", include_str!("../assets/corpus/jsnotes/server.js")),
    ("jsnotes/routes.js", include_str!("../assets/corpus/jsnotes/routes.js")),
    ("jsnotes/render.js", include_str!("../assets/corpus/jsnotes/render.js")),
    ("jsnotes/db.js", include_str!("../assets/corpus/jsnotes/db.js")),
    ("jsnotes/helpers.js", include_str!("../assets/corpus/jsnotes/helpers.js")),
    ("annotations.toml", include_str!("../assets/corpus/annotations.toml")),
];

/// Number of source files in the bundled corpus (manifests and annotations
/// excluded).
pub fn bundled_corpus_source_file_count() -> usize {
    BUNDLED_CORPUS
        .iter()
        .filter(|(path, _)| !path.ends_with(".toml"))
        .count()
}

/// Materialize the bundled corpus into `dest`.
pub fn build_bundled_corpus(dest: &Path) -> std::io::Result<()> {
    for (rel, content) in BUNDLED_CORPUS {
        let path = dest.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, content)?;
    }
    Ok(())
}
