//! Remote chat-completion backend.
//!
//! Targets any endpoint speaking the common JSON chat-completion wire
//! protocol over HTTP (messages array, model name, temperature). Structured
//! output is requested via an explicit schema instruction in the prompt;
//! responses are validated and repaired at most once (re-prompt with the
//! validation error appended) before failing with MalformedResponse.

use super::{
    render_prompt, sort_findings, AnalysisBackend, BackendError, BackendRequest, BackendTask,
    Confidence, DetectionReport, ExploitTrace, Finding, Remediation, TEMPLATE_VERSION,
};
use crate::cvss::CvssVector;
use crate::hash::sha256_hex;
use crate::prescore::VulnCategory;
use serde::{Deserialize, Serialize};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

const SYSTEM_PROMPT: &str = "You are a precise code security analysis engine. Respond with exactly the requested JSON object and no surrounding prose.";

#[derive(Debug, Clone)]
pub struct ModelBackendConfig {
    /// Full URL of the chat-completion endpoint.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the API key; the request is sent without
    /// an Authorization header when the variable is unset.
    pub api_key_env: String,
    pub timeout_secs: u64,
    pub max_concurrent: usize,
    pub temperature: f64,
}

impl ModelBackendConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> ModelBackendConfig {
        ModelBackendConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key_env: "MALSCAN_API_KEY".to_string(),
            timeout_secs: 60,
            max_concurrent: 4,
            temperature: 0.0,
        }
    }
}

/// Counting gate bounding in-flight requests.
struct ConcurrencyGate {
    slots: Mutex<usize>,
    cv: Condvar,
}

impl ConcurrencyGate {
    fn new(limit: usize) -> ConcurrencyGate {
        ConcurrencyGate {
            slots: Mutex::new(limit.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut slots = self.slots.lock().unwrap();
        while *slots == 0 {
            slots = self.cv.wait(slots).unwrap();
        }
        *slots -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a ConcurrencyGate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.gate.slots.lock().unwrap() += 1;
        self.gate.cv.notify_one();
    }
}

pub struct ModelBackend {
    config: ModelBackendConfig,
    agent: ureq::Agent,
    gate: ConcurrencyGate,
}

#[derive(Serialize)]
struct ChatMessage {
    role: &'static str,
    content: String,
}

#[derive(Serialize)]
struct ChatBody<'a> {
    model: &'a str,
    temperature: f64,
    messages: Vec<ChatMessage>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

impl ModelBackend {
    pub fn new(config: ModelBackendConfig) -> ModelBackend {
        let agent_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .build();
        let gate = ConcurrencyGate::new(config.max_concurrent);
        ModelBackend {
            agent: agent_config.into(),
            config,
            gate,
        }
    }

    fn chat(&self, messages: Vec<ChatMessage>) -> Result<String, BackendError> {
        let _slot = self.gate.acquire();
        let body = ChatBody {
            model: &self.config.model,
            temperature: self.config.temperature,
            messages,
        };
        let mut request = self.agent.post(&self.config.endpoint);
        if let Ok(key) = std::env::var(&self.config.api_key_env) {
            if !key.is_empty() {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let mut response = request
            .send_json(&body)
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let parsed: ChatResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::MalformedResponse(format!("bad wire response: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| BackendError::MalformedResponse("response has no choices".into()))
    }

    /// Ask once, validate, and re-prompt at most once with the validation
    /// error appended before giving up.
    fn ask_validated<T>(
        &self,
        prompt: &str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<(T, String), BackendError> {
        let base = vec![
            ChatMessage {
                role: "system",
                content: SYSTEM_PROMPT.to_string(),
            },
            ChatMessage {
                role: "user",
                content: prompt.to_string(),
            },
        ];
        let raw = self.chat(base)?;
        match parse(&raw) {
            Ok(v) => Ok((v, raw)),
            Err(first_error) => {
                let repair = vec![
                    ChatMessage {
                        role: "system",
                        content: SYSTEM_PROMPT.to_string(),
                    },
                    ChatMessage {
                        role: "user",
                        content: prompt.to_string(),
                    },
                    ChatMessage {
                        role: "assistant",
                        content: raw,
                    },
                    ChatMessage {
                        role: "user",
                        content: format!(
                            "The previous response failed validation: {first_error}. Respond again with exactly the requested JSON object and nothing else."
                        ),
                    },
                ];
                let raw2 = self.chat(repair)?;
                match parse(&raw2) {
                    Ok(v) => Ok((v, raw2)),
                    Err(second_error) => Err(BackendError::MalformedResponse(format!(
                        "after one repair attempt: {second_error}"
                    ))),
                }
            }
        }
    }
}

impl AnalysisBackend for ModelBackend {
    fn id(&self) -> String {
        format!("model:{}", self.config.model)
    }

    fn summarize(&self, req: &BackendRequest) -> Result<String, BackendError> {
        req.check_budget()?;
        let prompt = render_prompt(req);
        let (summary, _raw) = self.ask_validated(&prompt, parse_summary)?;
        Ok(summary)
    }

    fn analyze(&self, req: &BackendRequest) -> Result<DetectionReport, BackendError> {
        debug_assert_eq!(req.task, BackendTask::Analyze);
        req.check_budget()?;
        let prompt = render_prompt(req);
        let (mut findings, raw) = self.ask_validated(&prompt, parse_findings)?;
        sort_findings(&mut findings);
        Ok(DetectionReport {
            component_id: req.component.id.clone(),
            findings,
            summary: req.context_summary.clone().unwrap_or_default(),
            backend_id: self.id(),
            template_version: TEMPLATE_VERSION.to_string(),
            raw_response_digest: sha256_hex(raw.as_bytes()),
        })
    }
}

fn parse_summary(raw: &str) -> Result<String, String> {
    let json = extract_json(raw)?;
    #[derive(Deserialize)]
    struct SummaryDoc {
        summary: String,
    }
    let doc: SummaryDoc =
        serde_json::from_str(json).map_err(|e| format!("summary JSON invalid: {e}"))?;
    let summary = doc.summary.trim().to_string();
    if summary.is_empty() {
        return Err("summary is empty".into());
    }
    Ok(summary)
}

#[derive(Deserialize)]
struct ModelFindingsDoc {
    findings: Vec<ModelFinding>,
}

#[derive(Deserialize)]
struct ModelFinding {
    category: String,
    title: String,
    explanation: String,
    severity_vector: String,
    confidence: Option<String>,
    exploit_trace: ModelTrace,
    remediation: ModelRemediation,
}

#[derive(Deserialize)]
struct ModelTrace {
    entry_point: String,
    steps: Vec<String>,
    impact: String,
}

#[derive(Deserialize)]
struct ModelRemediation {
    recommendation: String,
    #[serde(default)]
    patched_snippet: Option<String>,
    preserves_functionality_note: Option<String>,
}

fn parse_findings(raw: &str) -> Result<Vec<Finding>, String> {
    let json = extract_json(raw)?;
    let doc: ModelFindingsDoc =
        serde_json::from_str(json).map_err(|e| format!("findings JSON invalid: {e}"))?;
    let mut findings = Vec::with_capacity(doc.findings.len());
    for (i, f) in doc.findings.into_iter().enumerate() {
        let category = VulnCategory::parse(&f.category)
            .ok_or_else(|| format!("finding {i}: unknown category `{}`", f.category))?;
        let vector = CvssVector::parse(&f.severity_vector)
            .map_err(|e| format!("finding {i}: {e}"))?;
        let confidence = match f.confidence.as_deref() {
            Some("low") => Confidence::Low,
            Some("high") => Confidence::High,
            Some("medium") | None => Confidence::Medium,
            Some(other) => return Err(format!("finding {i}: unknown confidence `{other}`")),
        };
        let finding = Finding::new(
            category,
            f.title,
            f.explanation,
            vector,
            ExploitTrace {
                entry_point: f.exploit_trace.entry_point,
                steps: f.exploit_trace.steps,
                impact: f.exploit_trace.impact,
            },
            Remediation {
                recommendation: f.remediation.recommendation,
                patched_snippet: f.remediation.patched_snippet.filter(|s| !s.trim().is_empty()),
                preserves_functionality_note: f
                    .remediation
                    .preserves_functionality_note
                    .unwrap_or_else(|| "Behavior-preserving fix as described.".to_string()),
            },
            confidence,
        );
        finding.validate().map_err(|e| format!("finding {i}: {e}"))?;
        findings.push(finding);
    }
    Ok(findings)
}

/// Extract the first balanced JSON object from a model response, tolerating
/// markdown fences and leading prose.
fn extract_json(raw: &str) -> Result<&str, String> {
    let bytes = raw.as_bytes();
    let start = raw.find('{').ok_or("no JSON object in response")?;
    let mut depth = 0i64;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Ok(&raw[start..=i]);
                }
            }
            _ => {}
        }
    }
    Err("unterminated JSON object in response".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_fenced_json() {
        let raw = "Here you go:\n```json\n{\"summary\": \"does things\"}\n```";
        assert_eq!(extract_json(raw).unwrap(), "{\"summary\": \"does things\"}");
    }

    #[test]
    fn extraction_respects_strings_with_braces() {
        let raw = "{\"summary\": \"uses { and } inside\"} trailing";
        assert_eq!(
            extract_json(raw).unwrap(),
            "{\"summary\": \"uses { and } inside\"}"
        );
    }

    #[test]
    fn summary_must_be_nonempty() {
        assert!(parse_summary("{\"summary\": \"  \"}").is_err());
        assert_eq!(parse_summary("{\"summary\": \"ok\"}").unwrap(), "ok");
    }

    #[test]
    fn findings_reject_unknown_categories() {
        let doc = r#"{"findings": [{"category": "nonsense", "title": "t", "explanation": "e",
            "severity_vector": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
            "confidence": "high",
            "exploit_trace": {"entry_point": "x", "steps": ["s"], "impact": "i"},
            "remediation": {"recommendation": "r", "patched_snippet": null,
                            "preserves_functionality_note": "n"}}]}"#;
        assert!(parse_findings(doc).unwrap_err().contains("unknown category"));
    }

    #[test]
    fn findings_score_is_recomputed_from_vector() {
        let doc = r#"{"findings": [{"category": "sql_injection", "title": "t", "explanation": "e",
            "severity_vector": "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:N",
            "confidence": "high",
            "exploit_trace": {"entry_point": "x", "steps": ["s"], "impact": "i"},
            "remediation": {"recommendation": "r", "patched_snippet": null,
                            "preserves_functionality_note": "n"}}]}"#;
        let findings = parse_findings(doc).unwrap();
        assert_eq!(findings[0].score.value, 9.1);
    }
}
