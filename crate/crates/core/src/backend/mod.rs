//! Pluggable Phase-1 summarization and Phase-2 deep analysis.
//!
//! Two backends share one request/response contract: a remote chat-completion
//! model client and a deterministic rule-based stand-in. The full pipeline
//! runs end-to-end with either; the rule backend additionally guarantees
//! byte-identical output for identical requests, which anchors golden tests.

mod model;
mod rules;

pub use model::{ModelBackend, ModelBackendConfig};
pub use rules::RuleBackend;

use crate::componentizer::CodeComponent;
use crate::cvss::{base_score, CvssScore, CvssVector};
use crate::lang::LanguageId;
use crate::prescore::{Indicator, VulnCategory};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version stamp of the prompt templates; recorded in every DetectionReport
/// so template changes invalidate caches and are visible in reports.
pub const TEMPLATE_VERSION: &str = "v1";

/// Default prompt token budget.
pub const DEFAULT_TOKEN_BUDGET: usize = 3072;

pub const SUMMARIZE_TEMPLATE: &str = include_str!("../../assets/prompts/summarize_v1.txt");
pub const ANALYZE_TEMPLATE: &str = include_str!("../../assets/prompts/analyze_v1.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendTask {
    Summarize,
    Analyze,
}

/// One unit of backend work.
#[derive(Debug, Clone)]
pub struct BackendRequest {
    pub task: BackendTask,
    pub component: CodeComponent,
    /// Triage indicators; only meaningful for analyze requests.
    pub indicators: Vec<Indicator>,
    pub language: LanguageId,
    pub token_budget: usize,
    /// Phase-1 summary, included as context in analyze prompts when present.
    pub context_summary: Option<String>,
}

impl BackendRequest {
    /// Estimated prompt tokens for this request. Must not exceed the budget;
    /// the orchestrator chunks oversized components before dispatch.
    pub fn estimated_tokens(&self) -> usize {
        estimate_tokens(&render_prompt(self))
    }

    pub fn check_budget(&self) -> Result<(), BackendError> {
        let estimated = self.estimated_tokens();
        if estimated > self.token_budget {
            return Err(BackendError::BudgetExceeded {
                estimated,
                budget: self.token_budget,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Low,
    Medium,
    High,
}

impl Confidence {
    pub fn as_str(&self) -> &'static str {
        match self {
            Confidence::Low => "low",
            Confidence::Medium => "medium",
            Confidence::High => "high",
        }
    }
}

/// Attacker-perspective narrative for one finding: entry point, ordered
/// escalation steps, ultimate impact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploitTrace {
    pub entry_point: String,
    pub steps: Vec<String>,
    pub impact: String,
}

impl ExploitTrace {
    pub fn validate(&self) -> Result<(), String> {
        if self.entry_point.trim().is_empty() {
            return Err("exploit trace entry_point is blank".into());
        }
        if self.steps.is_empty() || self.steps.iter().any(|s| s.trim().is_empty()) {
            return Err("exploit trace needs at least one non-blank step".into());
        }
        if self.impact.trim().is_empty() {
            return Err("exploit trace impact is blank".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Remediation {
    pub recommendation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patched_snippet: Option<String>,
    pub preserves_functionality_note: String,
}

impl Remediation {
    pub fn validate(&self) -> Result<(), String> {
        if self.recommendation.trim().is_empty() {
            return Err("remediation recommendation is blank".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub category: VulnCategory,
    pub title: String,
    pub explanation: String,
    pub severity_vector: CvssVector,
    pub score: CvssScore,
    pub exploit_trace: ExploitTrace,
    pub remediation: Remediation,
    pub confidence: Confidence,
}

impl Finding {
    /// Build a finding with the score derived from the vector, maintaining
    /// `score == base_score(severity_vector)`.
    pub fn new(
        category: VulnCategory,
        title: impl Into<String>,
        explanation: impl Into<String>,
        severity_vector: CvssVector,
        exploit_trace: ExploitTrace,
        remediation: Remediation,
        confidence: Confidence,
    ) -> Finding {
        Finding {
            category,
            title: title.into(),
            explanation: explanation.into(),
            severity_vector,
            score: base_score(&severity_vector),
            exploit_trace,
            remediation,
            confidence,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.score != base_score(&self.severity_vector) {
            return Err("finding score does not match its vector".into());
        }
        self.exploit_trace.validate()?;
        self.remediation.validate()
    }
}

/// Per-component backend verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub component_id: String,
    pub findings: Vec<Finding>,
    pub summary: String,
    pub backend_id: String,
    pub template_version: String,
    pub raw_response_digest: String,
}

impl DetectionReport {
    pub fn validate(&self) -> Result<(), String> {
        for f in &self.findings {
            f.validate()?;
        }
        // Findings sorted by score descending, ties by category name.
        for pair in self.findings.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let ordered = a.score > b.score
                || (a.score == b.score && a.category.as_str() <= b.category.as_str());
            if !ordered {
                return Err("findings are not sorted by score then category".into());
            }
        }
        Ok(())
    }
}

/// Sort findings into report order: score descending, ties by category name.
pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| {
        b.score
            .cmp(&a.score)
            .then_with(|| a.category.as_str().cmp(b.category.as_str()))
    });
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("estimated {estimated} tokens exceeds budget of {budget}")]
    BudgetExceeded { estimated: usize, budget: usize },
}

/// The backend contract. Implementations must be safe for concurrent
/// requests up to their configured limit.
pub trait AnalysisBackend: Send + Sync {
    fn id(&self) -> String;

    /// Single-paragraph description of the component's purpose.
    fn summarize(&self, req: &BackendRequest) -> Result<String, BackendError>;

    /// Structured detection verdict; every finding carries a complete
    /// exploit trace and remediation.
    fn analyze(&self, req: &BackendRequest) -> Result<DetectionReport, BackendError>;
}

/// Deterministic over-approximation of token count: ceil(bytes / 3).
/// Three bytes per token is conservative for source code, so staying under
/// the budget here keeps real tokenizers under it too.
pub fn estimate_tokens(text: &str) -> usize {
    text.len().div_ceil(3)
}

/// Render the prompt for a request from the versioned templates.
pub fn render_prompt(req: &BackendRequest) -> String {
    let template = match req.task {
        BackendTask::Summarize => SUMMARIZE_TEMPLATE,
        BackendTask::Analyze => ANALYZE_TEMPLATE,
    };
    let indicator_block = if req.indicators.is_empty() {
        "(none)".to_string()
    } else {
        req.indicators
            .iter()
            .map(|i| {
                format!(
                    "- [{}] {} at bytes {}..{}: `{}`",
                    i.category.as_str(),
                    i.rule_id,
                    i.span.start,
                    i.span.end,
                    i.excerpt
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let summary_block = req
        .context_summary
        .as_deref()
        .unwrap_or("(not summarized)")
        .to_string();
    // Substitute the source last and via split so placeholder-looking text
    // inside the component can never be rewritten.
    let pieces: Vec<String> = template
        .split("{component_source}")
        .map(|part| {
            part.replace("{language}", req.language.as_str())
                .replace("{component_kind}", req.component.kind.as_str())
                .replace("{component_name}", &req.component.name)
                .replace("{indicator_block}", &indicator_block)
                .replace("{summary_block}", &summary_block)
        })
        .collect();
    pieces.join(&req.component.source)
}
