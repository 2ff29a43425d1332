//! Phase-1½ triage: match static indicator rules against component source and
//! map matches to a preliminary CVSS score.
//!
//! Rules are triage priors, not final severities — the score exists to
//! prioritize components for deep analysis. A rule's primary `pattern` is a
//! literal matched with word-boundary semantics; the optional
//! `context_pattern` is a regex that must also match somewhere in the same
//! component before the rule fires.

use crate::componentizer::{CodeComponent, Span};
use crate::cvss::{base_score, CvssScore, CvssVector};
use crate::hash::sha256_hex;
use crate::lang::LanguageId;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

/// The ten triaged vulnerability categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VulnCategory {
    SqlInjection,
    CrossSiteScripting,
    RemoteCodeExecution,
    CommandInjection,
    PathTraversal,
    InsecureDeserialization,
    HardcodedCredentials,
    Backdoor,
    LogicBomb,
    PrivilegeEscalation,
}

impl VulnCategory {
    pub const ALL: [VulnCategory; 10] = [
        VulnCategory::SqlInjection,
        VulnCategory::CrossSiteScripting,
        VulnCategory::RemoteCodeExecution,
        VulnCategory::CommandInjection,
        VulnCategory::PathTraversal,
        VulnCategory::InsecureDeserialization,
        VulnCategory::HardcodedCredentials,
        VulnCategory::Backdoor,
        VulnCategory::LogicBomb,
        VulnCategory::PrivilegeEscalation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            VulnCategory::SqlInjection => "sql_injection",
            VulnCategory::CrossSiteScripting => "cross_site_scripting",
            VulnCategory::RemoteCodeExecution => "remote_code_execution",
            VulnCategory::CommandInjection => "command_injection",
            VulnCategory::PathTraversal => "path_traversal",
            VulnCategory::InsecureDeserialization => "insecure_deserialization",
            VulnCategory::HardcodedCredentials => "hardcoded_credentials",
            VulnCategory::Backdoor => "backdoor",
            VulnCategory::LogicBomb => "logic_bomb",
            VulnCategory::PrivilegeEscalation => "privilege_escalation",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            VulnCategory::SqlInjection => "SQL Injection",
            VulnCategory::CrossSiteScripting => "Cross-Site Scripting",
            VulnCategory::RemoteCodeExecution => "Remote Code Execution",
            VulnCategory::CommandInjection => "Command Injection",
            VulnCategory::PathTraversal => "Path Traversal",
            VulnCategory::InsecureDeserialization => "Insecure Deserialization",
            VulnCategory::HardcodedCredentials => "Hardcoded Credentials",
            VulnCategory::Backdoor => "Backdoor",
            VulnCategory::LogicBomb => "Logic Bomb",
            VulnCategory::PrivilegeEscalation => "Privilege Escalation",
        }
    }

    pub fn parse(s: &str) -> Option<VulnCategory> {
        VulnCategory::ALL.iter().copied().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for VulnCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One loaded triage rule.
#[derive(Debug, Clone)]
pub struct IndicatorRule {
    pub rule_id: String,
    pub category: VulnCategory,
    /// Empty set means the rule applies to every language.
    pub languages: Vec<LanguageId>,
    pub pattern: String,
    pub context_pattern: Option<String>,
    pub vector: CvssVector,
    pub description: String,
    matcher: Regex,
    context: Option<Regex>,
}

impl IndicatorRule {
    pub fn applies_to(&self, lang: LanguageId) -> bool {
        self.languages.is_empty() || self.languages.contains(&lang)
    }
}

/// One static-rule match inside a component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicator {
    pub rule_id: String,
    pub category: VulnCategory,
    /// Byte range within the component source.
    pub span: Span,
    /// Matched text, truncated to 200 bytes.
    pub excerpt: String,
    pub vector: CvssVector,
}

/// Triage outcome for one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescoreResult {
    pub component_id: String,
    pub indicators: Vec<Indicator>,
    pub score: CvssScore,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule file error at line {line}: {reason}")]
pub struct RuleLoadError {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Deserialize)]
struct RuleFileDoc {
    #[serde(default)]
    rule: Vec<RuleEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    rule_id: String,
    category: String,
    #[serde(default)]
    languages: Vec<String>,
    pattern: String,
    #[serde(default)]
    context_pattern: Option<String>,
    vector: String,
    description: String,
}

/// A loaded, immutable rule set plus the digest of its source text (used to
/// key the result cache).
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub rules: Vec<IndicatorRule>,
    pub digest: String,
}

const BUNDLED_RULES: &str = include_str!("../assets/rules/default.toml");

impl RuleSet {
    pub fn load(source: &str) -> Result<RuleSet, RuleLoadError> {
        Ok(RuleSet {
            rules: load_rules(source)?,
            digest: sha256_hex(source.as_bytes()),
        })
    }

    /// The rule set shipped with the tool.
    pub fn bundled() -> RuleSet {
        RuleSet::load(BUNDLED_RULES).expect("bundled rule set must load")
    }
}

/// Parse a rule file. Fails atomically: either every rule loads or none do.
pub fn load_rules(source: &str) -> Result<Vec<IndicatorRule>, RuleLoadError> {
    let doc: RuleFileDoc = toml::from_str(source).map_err(|e| {
        let line = e
            .span()
            .map(|span| line_of_offset(source, span.start))
            .unwrap_or(1);
        RuleLoadError {
            line,
            reason: e.message().to_string(),
        }
    })?;

    let mut seen = HashSet::new();
    let mut rules = Vec::with_capacity(doc.rule.len());
    for (idx, entry) in doc.rule.into_iter().enumerate() {
        let line = rule_entry_line(source, idx);
        let fail = |reason: String| RuleLoadError { line, reason };

        if entry.rule_id.trim().is_empty() {
            return Err(fail("rule_id must be non-empty".into()));
        }
        if !seen.insert(entry.rule_id.clone()) {
            return Err(fail(format!("duplicate rule_id `{}`", entry.rule_id)));
        }
        if entry.pattern.is_empty() {
            return Err(fail(format!("rule `{}` has an empty pattern", entry.rule_id)));
        }
        let category = VulnCategory::parse(&entry.category)
            .ok_or_else(|| fail(format!("unknown category `{}`", entry.category)))?;
        let mut languages = Vec::new();
        for name in &entry.languages {
            let lang = LanguageId::parse(name)
                .ok_or_else(|| fail(format!("unknown language `{name}`")))?;
            languages.push(lang);
        }
        let vector = CvssVector::parse(&entry.vector)
            .map_err(|e| fail(format!("rule `{}`: {e}", entry.rule_id)))?;
        let matcher = compile_word_pattern(&entry.pattern)
            .map_err(|e| fail(format!("rule `{}`: bad pattern: {e}", entry.rule_id)))?;
        let context = match &entry.context_pattern {
            Some(ctx) if !ctx.is_empty() => Some(
                Regex::new(ctx)
                    .map_err(|e| fail(format!("rule `{}`: bad context_pattern: {e}", entry.rule_id)))?,
            ),
            _ => None,
        };
        rules.push(IndicatorRule {
            rule_id: entry.rule_id,
            category,
            languages,
            pattern: entry.pattern,
            context_pattern: entry.context_pattern,
            vector,
            description: entry.description,
            matcher,
            context,
        });
    }
    Ok(rules)
}

/// Compile a literal pattern with word-boundary semantics: `\b` anchors are
/// added on each side whose edge character is a word character, so `eval`
/// will not fire inside `evaluate` but `/bin/sh` still matches after a slash.
fn compile_word_pattern(pattern: &str) -> Result<Regex, regex::Error> {
    let escaped = regex::escape(pattern);
    let is_word = |c: char| c.is_ascii_alphanumeric() || c == '_';
    let prefix = if pattern.chars().next().map(is_word).unwrap_or(false) {
        r"\b"
    } else {
        ""
    };
    let suffix = if pattern.chars().last().map(is_word).unwrap_or(false) {
        r"\b"
    } else {
        ""
    };
    Regex::new(&format!("{prefix}{escaped}{suffix}"))
}

fn line_of_offset(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Line of the Nth `[[rule]]` table header (0-based), for diagnostics on
/// semantically invalid entries.
fn rule_entry_line(source: &str, idx: usize) -> usize {
    source
        .lines()
        .enumerate()
        .filter(|(_, l)| l.trim_start().starts_with("[[rule]]"))
        .nth(idx)
        .map(|(i, _)| i + 1)
        .unwrap_or(1)
}

/// Apply every rule whose language set includes `language` to a component.
/// One indicator is emitted per match site, sorted by span start then rule
/// id; the score is the maximum base score over indicator vectors (0.0 when
/// none); `flagged` compares against `flag_threshold`.
pub fn prescore(
    component: &CodeComponent,
    language: LanguageId,
    rules: &[IndicatorRule],
    flag_threshold: f64,
) -> PrescoreResult {
    let mut indicators = Vec::new();
    for rule in rules.iter().filter(|r| r.applies_to(language)) {
        if let Some(ctx) = &rule.context {
            if !ctx.is_match(&component.source) {
                continue;
            }
        }
        for m in rule.matcher.find_iter(&component.source) {
            indicators.push(Indicator {
                rule_id: rule.rule_id.clone(),
                category: rule.category,
                span: Span {
                    start: m.start(),
                    end: m.end(),
                },
                excerpt: truncate_bytes(m.as_str(), 200).to_string(),
                vector: rule.vector,
            });
        }
    }
    indicators.sort_by(|a, b| {
        a.span
            .start
            .cmp(&b.span.start)
            .then_with(|| a.rule_id.cmp(&b.rule_id))
    });
    let score = indicators
        .iter()
        .map(|i| base_score(&i.vector))
        .max()
        .unwrap_or_else(CvssScore::zero);
    PrescoreResult {
        component_id: component.id.clone(),
        indicators,
        score,
        flagged: score.value >= flag_threshold,
    }
}

fn truncate_bytes(s: &str, max: usize) -> &str {
    if s.len() <= max {
        return s;
    }
    let mut end = max;
    while end > 0 && !s.is_char_boundary(end) {
        end -= 1;
    }
    &s[..end]
}
