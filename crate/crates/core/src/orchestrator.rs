//! Two-phase pipeline driver: decompose → summarize → prescore → analyze
//! flagged components → assemble the scan report.
//!
//! Components are independent by construction, so analysis runs on a bounded
//! worker pool; results are assembled by component index, which makes the
//! output independent of completion order (and of `max_parallel`). A backend
//! failure degrades that component's outcome — a scan never aborts because
//! one component failed.

use crate::backend::{
    AnalysisBackend, BackendError, BackendRequest, BackendTask, DetectionReport, Finding,
    sort_findings, TEMPLATE_VERSION,
};
use crate::componentizer::{
    decompose, fallback_fragment, fragment_ranges, CodeComponent, ComponentKind, SourceFile, Span,
};
use crate::hash::{sha256_hex, short_id};
use crate::lang::{detect_language, LanguageId};
use crate::prescore::{prescore, Indicator, PrescoreResult, RuleSet};
use crate::report::{compute_totals, current_timestamp, FileReport, ScanReport, SCHEMA_VERSION};
use globset::{Glob, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use thiserror::Error;
use walkdir::WalkDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Model,
    Rules,
}

/// Scan configuration. CLI flags and the config file both deserialize into
/// this shape; unset fields take the defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub flag_threshold: f64,
    pub fail_threshold: f64,
    pub token_budget: usize,
    pub max_parallel: usize,
    pub backend_id: BackendChoice,
    pub force_analyze_all: bool,
    /// Summarize components that are not analyzed, too (full-report mode).
    pub summarize_all: bool,
    pub rule_set_path: Option<PathBuf>,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ScanConfig {
    fn default() -> ScanConfig {
        ScanConfig {
            flag_threshold: 4.0,
            fail_threshold: 7.0,
            token_budget: 3072,
            max_parallel: 4,
            backend_id: BackendChoice::Rules,
            force_analyze_all: false,
            summarize_all: false,
            rule_set_path: None,
            include: Vec::new(),
            exclude: Vec::new(),
            cache_dir: None,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=10.0).contains(&self.flag_threshold) {
            return Err("flag_threshold must be in [0.0, 10.0]".into());
        }
        if !(0.0..=10.0).contains(&self.fail_threshold) {
            return Err("fail_threshold must be in [0.0, 10.0]".into());
        }
        if self.token_budget == 0 {
            return Err("token_budget must be positive".into());
        }
        if self.max_parallel == 0 {
            return Err("max_parallel must be at least 1".into());
        }
        Ok(())
    }

    /// Digest over the output-affecting config fields; recorded in reports.
    /// Performance knobs (max_parallel, cache_dir) are excluded so identical
    /// scans produce identical bytes regardless of execution strategy.
    pub fn digest(&self) -> String {
        let semantic = serde_json::json!({
            "flag_threshold": self.flag_threshold,
            "fail_threshold": self.fail_threshold,
            "token_budget": self.token_budget,
            "backend_id": self.backend_id,
            "force_analyze_all": self.force_analyze_all,
            "summarize_all": self.summarize_all,
            "rule_set_path": self.rule_set_path,
            "include": self.include,
            "exclude": self.exclude,
        });
        sha256_hex(semantic.to_string().as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeStatus {
    Analyzed,
    SkippedLowRisk,
    DegradedBackendError,
}

/// Per-component pipeline outcome. `detection` is present exactly when the
/// status is `analyzed`; degraded outcomes keep their prescore.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentOutcome {
    pub component: CodeComponent,
    pub prescore: PrescoreResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionReport>,
    pub status: OutcomeStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("scan root {0} does not exist")]
    RootMissing(PathBuf),
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid include/exclude glob: {0}")]
    BadGlob(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

/// Result of scanning one file.
#[derive(Debug, Clone)]
pub struct FileScan {
    pub outcomes: Vec<ComponentOutcome>,
    pub warnings: Vec<String>,
}

/// Scan one in-memory source file. Every component gets exactly one outcome.
pub fn scan_file(
    file: &SourceFile,
    cfg: &ScanConfig,
    rules: &RuleSet,
    backend: &dyn AnalysisBackend,
) -> FileScan {
    let mut warnings = Vec::new();
    let components = match decompose(file) {
        Ok(components) => components,
        Err(failure) => {
            warnings.push(format!(
                "{}: parse failed at byte {}; degraded to fallback fragmentation",
                failure.path, failure.position
            ));
            fallback_fragment(file, crate::componentizer::DEFAULT_FRAGMENT_BYTES)
        }
    };

    let cache = cfg.cache_dir.as_deref().map(ResultCache::new);
    let warning_sink: Mutex<Vec<String>> = Mutex::new(Vec::new());

    // Parent components are triaged on their own bytes only: extracted
    // children are analyzed independently, so matching them again inside the
    // parent would double-report every finding.
    let triage_views: Vec<Option<String>> = components
        .iter()
        .map(|c| own_source_view(c, &components))
        .collect();

    let indexed: Vec<(usize, &CodeComponent)> = components.iter().enumerate().collect();
    let outcomes = run_indexed(cfg.max_parallel, &indexed, |(idx, component)| {
        process_component(
            file,
            component,
            triage_views[*idx].as_deref(),
            cfg,
            rules,
            backend,
            cache.as_ref(),
            &warning_sink,
        )
    });

    warnings.extend(warning_sink.into_inner().unwrap());
    FileScan { outcomes, warnings }
}

/// Replace child spans with blanks (newlines kept) so triage sees only the
/// parent's own bytes. Returns None when the component has no children.
fn own_source_view(component: &CodeComponent, all: &[CodeComponent]) -> Option<String> {
    let children: Vec<&CodeComponent> = all
        .iter()
        .filter(|c| c.parent_id.as_deref() == Some(component.id.as_str()))
        .collect();
    if children.is_empty() {
        return None;
    }
    let base = component.span.start;
    let mut bytes = component.source.clone().into_bytes();
    for child in children {
        let start = child.span.start.saturating_sub(base);
        let end = child.span.end.saturating_sub(base).min(bytes.len());
        for b in &mut bytes[start..end] {
            if *b != b'\n' {
                *b = b' ';
            }
        }
    }
    // Every replaced byte is ASCII, so the result stays valid UTF-8.
    Some(String::from_utf8(bytes).expect("blanked source is UTF-8"))
}

/// Read and scan a file from disk.
pub fn scan_path(
    path: &Path,
    display_path: &str,
    cfg: &ScanConfig,
    rules: &RuleSet,
    backend: &dyn AnalysisBackend,
) -> Result<(SourceFile, FileScan), ScanError> {
    let bytes = std::fs::read(path).map_err(|source| ScanError::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let language = detect_language(display_path, None);
    let (file, decode_warning) = SourceFile::from_bytes(display_path, language, &bytes);
    let mut scan = scan_file(&file, cfg, rules, backend);
    if let Some(w) = decode_warning {
        scan.warnings.insert(0, w);
    }
    Ok((file, scan))
}

/// Walk a directory tree, scan every matching file, and assemble the report.
/// Files are visited in path order; assembly is deterministic and
/// independent of `max_parallel`.
pub fn scan_tree(
    root: &Path,
    cfg: &ScanConfig,
    rules: &RuleSet,
    backend: &dyn AnalysisBackend,
) -> Result<ScanReport, ScanError> {
    cfg.validate().map_err(ScanError::BadConfig)?;
    if !root.exists() {
        return Err(ScanError::RootMissing(root.to_path_buf()));
    }
    let started_at = current_timestamp();
    let include = build_globset(&cfg.include)?;
    let exclude = build_globset(&cfg.exclude)?;

    let mut entries: Vec<(PathBuf, String)> = Vec::new();
    if root.is_file() {
        let name = root
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| root.display().to_string());
        entries.push((root.to_path_buf(), name));
    } else {
        for entry in WalkDir::new(root).sort_by_file_name() {
            let entry = match entry {
                Ok(e) => e,
                Err(_) => continue,
            };
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(root)
                .unwrap_or(entry.path())
                .to_string_lossy()
                .replace('\\', "/");
            if let Some(include) = &include {
                if !include.is_match(&rel) {
                    continue;
                }
            }
            if let Some(exclude) = &exclude {
                if exclude.is_match(&rel) {
                    continue;
                }
            }
            entries.push((entry.path().to_path_buf(), rel));
        }
    }
    entries.sort_by(|a, b| a.1.cmp(&b.1));

    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for (path, rel) in entries {
        match scan_path(&path, &rel, cfg, rules, backend) {
            Ok((file, scan)) => {
                warnings.extend(scan.warnings);
                files.push(FileReport {
                    path: file.path.clone(),
                    language: file.language,
                    content_hash: file.content_hash.clone(),
                    components: scan.outcomes,
                });
            }
            Err(e) => warnings.push(format!("skipped {rel}: {e}")),
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));

    let totals = compute_totals(&files);
    Ok(ScanReport {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: current_timestamp(),
        config_digest: cfg.digest(),
        files,
        totals,
        warnings,
    })
}

fn build_globset(patterns: &[String]) -> Result<Option<GlobSet>, ScanError> {
    if patterns.is_empty() {
        return Ok(None);
    }
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|e| ScanError::BadGlob(e.to_string()))?;
        builder.add(glob);
    }
    builder
        .build()
        .map(Some)
        .map_err(|e| ScanError::BadGlob(e.to_string()))
}

/// Run `f` over items on a bounded worker pool, returning results in item
/// order regardless of completion order.
fn run_indexed<T, R, F>(max_parallel: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let n = items.len();
    if n == 0 {
        return Vec::new();
    }
    let workers = max_parallel.max(1).min(n);
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled slot"))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn process_component(
    file: &SourceFile,
    component: &CodeComponent,
    triage_source: Option<&str>,
    cfg: &ScanConfig,
    rules: &RuleSet,
    backend: &dyn AnalysisBackend,
    cache: Option<&ResultCache>,
    warnings: &Mutex<Vec<String>>,
) -> ComponentOutcome {
    let pre = match triage_source {
        Some(own) => {
            let view = CodeComponent {
                source: own.to_string(),
                ..component.clone()
            };
            prescore(&view, file.language, &rules.rules, cfg.flag_threshold)
        }
        None => prescore(component, file.language, &rules.rules, cfg.flag_threshold),
    };
    let will_analyze = pre.flagged || cfg.force_analyze_all;

    if !will_analyze {
        let mut component = component.clone();
        if cfg.summarize_all {
            match summarize_component(file, &component, &[], cfg, backend) {
                Ok(summary) => component.summary = Some(summary),
                Err(e) => warnings
                    .lock()
                    .unwrap()
                    .push(format!("{}: summarize failed for `{}`: {e}", file.path, component.name)),
            }
        }
        return ComponentOutcome {
            component,
            prescore: pre,
            detection: None,
            status: OutcomeStatus::SkippedLowRisk,
            error: None,
        };
    }

    let cache_slot = cache.map(|c| {
        (
            c,
            cache_key(file, component, rules, &backend.id(), cfg.token_budget),
        )
    });
    if let Some((cache, key)) = &cache_slot {
        if let Some(hit) = cache.get(key) {
            let mut component = component.clone();
            component.summary = Some(hit.detection.summary.clone());
            return ComponentOutcome {
                component,
                prescore: pre,
                detection: Some(hit.detection),
                status: OutcomeStatus::Analyzed,
                error: None,
            };
        }
    }

    match analyze_component(file, component, &pre.indicators, cfg, backend) {
        Ok(detection) => {
            if let Some((cache, key)) = &cache_slot {
                cache.put(key, &CachedEntry {
                    detection: detection.clone(),
                });
            }
            let mut component = component.clone();
            component.summary = Some(detection.summary.clone());
            ComponentOutcome {
                component,
                prescore: pre,
                detection: Some(detection),
                status: OutcomeStatus::Analyzed,
                error: None,
            }
        }
        Err(e) => ComponentOutcome {
            component: component.clone(),
            prescore: pre,
            detection: None,
            status: OutcomeStatus::DegradedBackendError,
            error: Some(e.to_string()),
        },
    }
}

/// Summarize a component, chunking when the prompt exceeds the budget; the
/// summary of the first chunk stands in for oversized components.
fn summarize_component(
    file: &SourceFile,
    component: &CodeComponent,
    indicators: &[Indicator],
    cfg: &ScanConfig,
    backend: &dyn AnalysisBackend,
) -> Result<String, BackendError> {
    let req = BackendRequest {
        task: BackendTask::Summarize,
        component: component.clone(),
        indicators: Vec::new(),
        language: file.language,
        token_budget: cfg.token_budget,
        context_summary: None,
    };
    if req.check_budget().is_ok() {
        return backend.summarize(&req);
    }
    let chunks = chunk_component(component, indicators, file.language, cfg, BackendTask::Summarize, None)?;
    let (first, _) = &chunks[0];
    let mut req = req;
    req.component = first.clone();
    req.check_budget()?;
    let summary = backend.summarize(&req)?;
    Ok(format!("{summary} (summarized from the first of {} chunks)", chunks.len()))
}

/// Analyze a component: summarize first (the summary rides along as prompt
/// context and lands in the detection report), chunk oversized sources, and
/// merge chunk findings per category.
fn analyze_component(
    file: &SourceFile,
    component: &CodeComponent,
    indicators: &[Indicator],
    cfg: &ScanConfig,
    backend: &dyn AnalysisBackend,
) -> Result<DetectionReport, BackendError> {
    let summary = summarize_component(file, component, indicators, cfg, backend)?;

    let whole = BackendRequest {
        task: BackendTask::Analyze,
        component: component.clone(),
        indicators: indicators.to_vec(),
        language: file.language,
        token_budget: cfg.token_budget,
        context_summary: Some(summary.clone()),
    };
    if whole.check_budget().is_ok() {
        let mut detection = backend.analyze(&whole)?;
        detection.summary = summary;
        detection.component_id = component.id.clone();
        return Ok(detection);
    }

    // Chunked dispatch: every request must individually respect the budget.
    let chunks = chunk_component(
        component,
        indicators,
        file.language,
        cfg,
        BackendTask::Analyze,
        Some(&summary),
    )?;
    let mut findings: Vec<Finding> = Vec::new();
    let mut digests = String::new();
    let mut backend_id = backend.id();
    for (chunk, chunk_indicators) in &chunks {
        let req = BackendRequest {
            task: BackendTask::Analyze,
            component: chunk.clone(),
            indicators: chunk_indicators.clone(),
            language: file.language,
            token_budget: cfg.token_budget,
            context_summary: Some(summary.clone()),
        };
        req.check_budget()?;
        let part = backend.analyze(&req)?;
        digests.push_str(&part.raw_response_digest);
        backend_id = part.backend_id;
        findings.extend(part.findings);
    }
    // One finding per category after merging, keeping the highest-scoring.
    sort_findings(&mut findings);
    let mut seen = std::collections::BTreeSet::new();
    findings.retain(|f| seen.insert(f.category));

    Ok(DetectionReport {
        component_id: component.id.clone(),
        findings,
        summary,
        backend_id,
        template_version: TEMPLATE_VERSION.to_string(),
        raw_response_digest: sha256_hex(digests.as_bytes()),
    })
}

/// Split an oversized component into dispatchable chunks with rebased
/// indicators. Fails with BudgetExceeded when the prompt overhead alone
/// fills the budget.
fn chunk_component(
    component: &CodeComponent,
    indicators: &[Indicator],
    language: LanguageId,
    cfg: &ScanConfig,
    task: BackendTask,
    context_summary: Option<&str>,
) -> Result<Vec<(CodeComponent, Vec<Indicator>)>, BackendError> {
    // The probe must mirror everything the real per-chunk request carries
    // except the source itself.
    let empty_source_probe = BackendRequest {
        task,
        component: CodeComponent {
            source: String::new(),
            ..component.clone()
        },
        indicators: indicators.to_vec(),
        language,
        token_budget: cfg.token_budget,
        context_summary: context_summary.map(|s| s.to_string()),
    };
    let overhead = empty_source_probe.estimated_tokens();
    let slack = 32;
    if overhead + slack >= cfg.token_budget {
        return Err(BackendError::BudgetExceeded {
            estimated: overhead + slack,
            budget: cfg.token_budget,
        });
    }
    let avail_bytes = (cfg.token_budget - overhead - slack) * 3;
    let ranges = fragment_ranges(&component.source, 0..component.source.len(), avail_bytes);
    let total = ranges.len();
    let mut chunks = Vec::with_capacity(total);
    for (i, range) in ranges.into_iter().enumerate() {
        let span = Span {
            start: component.span.start + range.start,
            end: component.span.start + range.end,
        };
        let chunk = CodeComponent {
            id: short_id(&[&component.id, &i.to_string(), "chunk"]),
            kind: ComponentKind::ModuleFragment,
            name: format!("{} (chunk {}/{})", component.name, i + 1, total),
            span,
            parent_id: Some(component.id.clone()),
            source: component.source[range.clone()].to_string(),
            summary: None,
        };
        let rebased: Vec<Indicator> = indicators
            .iter()
            .filter(|ind| ind.span.start >= range.start && ind.span.start < range.end)
            .map(|ind| Indicator {
                rule_id: ind.rule_id.clone(),
                category: ind.category,
                span: Span {
                    start: ind.span.start - range.start,
                    end: ind.span.end.min(range.end) - range.start,
                },
                excerpt: ind.excerpt.clone(),
                vector: ind.vector,
            })
            .collect();
        chunks.push((chunk, rebased));
    }
    Ok(chunks)
}

fn cache_key(
    file: &SourceFile,
    component: &CodeComponent,
    rules: &RuleSet,
    backend_id: &str,
    token_budget: usize,
) -> String {
    sha256_hex(
        format!(
            "{}\0{}\0{}\0{}\0{}\0{}\0{}",
            file.content_hash,
            component.span.start,
            component.span.end,
            rules.digest,
            TEMPLATE_VERSION,
            backend_id,
            token_budget
        )
        .as_bytes(),
    )
}

#[derive(Serialize, Deserialize)]
struct CachedEntry {
    detection: DetectionReport,
}

/// Content-addressed on-disk cache of per-component detection results.
/// Best-effort: IO failures silently miss.
struct ResultCache {
    dir: PathBuf,
}

impl ResultCache {
    fn new(dir: &Path) -> ResultCache {
        ResultCache {
            dir: dir.to_path_buf(),
        }
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    fn get(&self, key: &str) -> Option<CachedEntry> {
        let text = std::fs::read_to_string(self.path_for(key)).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn put(&self, key: &str, entry: &CachedEntry) {
        let path = self.path_for(key);
        if let Some(parent) = path.parent() {
            if std::fs::create_dir_all(parent).is_err() {
                return;
            }
        }
        let tmp = path.with_extension("tmp");
        if let Ok(text) = serde_json::to_string(entry) {
            if std::fs::write(&tmp, text).is_ok() {
                let _ = std::fs::rename(&tmp, &path);
            }
        }
    }
}
