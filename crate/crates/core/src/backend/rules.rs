//! Deterministic rule-based backend.
//!
//! Reflects triage indicators into structured findings through a fixed
//! per-category lookup table: one finding per distinct category, carrying the
//! highest-scoring indicator vector for that category. Identical requests
//! produce byte-identical reports, which makes this backend the anchor for
//! golden-file tests and fully offline scans.

use super::{
    sort_findings, AnalysisBackend, BackendError, BackendRequest, Confidence, DetectionReport,
    ExploitTrace, Finding, Remediation, TEMPLATE_VERSION,
};
use crate::componentizer::ComponentKind;
use crate::cvss::{base_score, CvssVector};
use crate::hash::sha256_hex;
use crate::lang::LanguageId;
use crate::prescore::{Indicator, VulnCategory};
use std::collections::BTreeMap;

#[derive(Debug, Default, Clone)]
pub struct RuleBackend;

impl RuleBackend {
    pub fn new() -> RuleBackend {
        RuleBackend
    }
}

impl AnalysisBackend for RuleBackend {
    fn id(&self) -> String {
        "rules".to_string()
    }

    fn summarize(&self, req: &BackendRequest) -> Result<String, BackendError> {
        req.check_budget()?;
        Ok(summarize_component(req))
    }

    fn analyze(&self, req: &BackendRequest) -> Result<DetectionReport, BackendError> {
        req.check_budget()?;

        // One finding per distinct category; the finding inherits the
        // highest-scoring vector among that category's indicators.
        let mut by_category: BTreeMap<VulnCategory, Vec<&Indicator>> = BTreeMap::new();
        for ind in &req.indicators {
            by_category.entry(ind.category).or_default().push(ind);
        }

        let mut findings = Vec::with_capacity(by_category.len());
        for (category, inds) in &by_category {
            let mut vector = inds[0].vector;
            for ind in inds {
                if base_score(&ind.vector) > base_score(&vector) {
                    vector = ind.vector;
                }
            }
            findings.push(build_finding(req, *category, inds, vector));
        }
        sort_findings(&mut findings);

        let summary = req.context_summary.clone().unwrap_or_default();
        let digest_input = serde_json::to_string(&(&findings, &summary))
            .expect("findings serialize");
        Ok(DetectionReport {
            component_id: req.component.id.clone(),
            findings,
            summary,
            backend_id: self.id(),
            template_version: TEMPLATE_VERSION.to_string(),
            raw_response_digest: sha256_hex(digest_input.as_bytes()),
        })
    }
}

fn summarize_component(req: &BackendRequest) -> String {
    let c = &req.component;
    let source = c.source.trim();
    if source.is_empty() {
        return "Empty code fragment with no executable statements.".to_string();
    }
    let lines = source.lines().count();
    let lang = req.language.as_str();
    let mut out = match c.kind {
        ComponentKind::ModuleFragment => format!(
            "Module fragment of {lines} line(s) of {lang} code holding top-level statements such as imports, configuration, and script entry logic."
        ),
        ComponentKind::Class => format!(
            "Class `{}` spanning {lines} line(s) of {lang} code; it groups related state and behavior behind its methods.",
            c.name
        ),
        ComponentKind::Function | ComponentKind::Method => {
            let what = if c.kind == ComponentKind::Function {
                "Function"
            } else {
                "Method"
            };
            format!("{what} `{}` spanning {lines} line(s) of {lang} code.", c.name)
        }
    };
    if contains_word(&c.source, "return") {
        out.push_str(" It computes and returns a value to its caller.");
    }
    if contains_word(&c.source, "print") || contains_word(&c.source, "println") {
        out.push_str(" It writes output directly.");
    }
    out
}

fn contains_word(haystack: &str, word: &str) -> bool {
    let bytes = haystack.as_bytes();
    let mut from = 0;
    while let Some(pos) = haystack[from..].find(word) {
        let start = from + pos;
        let end = start + word.len();
        let is_word = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
        let left_ok = start == 0 || !is_word(bytes[start - 1]);
        let right_ok = end >= bytes.len() || !is_word(bytes[end]);
        if left_ok && right_ok {
            return true;
        }
        from = end;
    }
    false
}

/// The line of component source containing the indicator, trimmed, as the
/// concrete anchor for exploit traces.
fn site_line(source: &str, ind: &Indicator) -> String {
    let start = source[..ind.span.start.min(source.len())]
        .rfind('\n')
        .map(|p| p + 1)
        .unwrap_or(0);
    let end = source[ind.span.start.min(source.len())..]
        .find('\n')
        .map(|p| ind.span.start + p)
        .unwrap_or(source.len());
    let mut line = source[start..end].trim().to_string();
    if line.len() > 160 {
        let mut cut = 160;
        while cut > 0 && !line.is_char_boundary(cut) {
            cut -= 1;
        }
        line.truncate(cut);
        line.push('…');
    }
    line
}

fn build_finding(
    req: &BackendRequest,
    category: VulnCategory,
    inds: &[&Indicator],
    vector: CvssVector,
) -> Finding {
    let c = &req.component;
    let primary = inds[0];
    let line = site_line(&c.source, primary);
    let name = &c.name;
    let kind = c.kind.as_str();
    let sites = inds.len();
    let site_note = if sites > 1 {
        format!(" ({sites} match sites)")
    } else {
        String::new()
    };
    let entry = format!("Untrusted input reaching `{line}` in {kind} `{name}`");

    let (title, explanation, steps, impact, recommendation, snippet, note, confidence) =
        match category {
            VulnCategory::SqlInjection => (
                "SQL statement built from untrusted input".to_string(),
                format!(
                    "`{name}` assembles a SQL statement with string concatenation or formatting around `{}`{site_note}, so crafted input changes the query structure instead of being treated as data.",
                    primary.excerpt
                ),
                vec![
                    format!("Submit a value containing SQL metacharacters (for example `' OR '1'='1`) through the parameter feeding `{name}`"),
                    "The value is spliced into the statement text and parsed by the database as SQL, not as data".to_string(),
                    "Refine the payload (UNION SELECT, stacked statements) to read or modify arbitrary tables".to_string(),
                ],
                "Read or write access to the application's database beyond the intended rows.".to_string(),
                "Use parameterized queries: pass user values as bound parameters and keep the statement text constant.".to_string(),
                sql_snippet(req.language),
                "Bound parameters return identical results for benign inputs; only the injection channel is removed.".to_string(),
                Confidence::High,
            ),
            VulnCategory::CrossSiteScripting => (
                "Unescaped dynamic content rendered into markup".to_string(),
                format!(
                    "`{name}` writes dynamic content into the page via `{}`{site_note} without escaping, so attacker markup executes in the victim's browser.",
                    primary.excerpt
                ),
                vec![
                    "Store or reflect a payload such as `<script>...</script>` through the rendered value".to_string(),
                    "A victim loads the page and the browser parses the injected markup as part of the document".to_string(),
                    "The script runs with the victim's session and origin".to_string(),
                ],
                "Session hijacking or arbitrary actions in the victim's browser context.".to_string(),
                "Escape output for the HTML context (or assign via text-only APIs such as textContent) and sanitize any HTML that must be preserved.".to_string(),
                xss_snippet(req.language),
                "Escaped rendering displays the same text content; only markup interpretation is disabled.".to_string(),
                Confidence::High,
            ),
            VulnCategory::RemoteCodeExecution => (
                "Dynamic code evaluation of untrusted input".to_string(),
                format!(
                    "`{name}` evaluates dynamically built code via `{}`{site_note}; any attacker-reachable input becomes executable code.",
                    primary.excerpt
                ),
                vec![
                    "Deliver an expression payload through the value that reaches the evaluator".to_string(),
                    "The runtime compiles and executes the payload in the application's process".to_string(),
                    "The payload imports process or system modules to run arbitrary commands".to_string(),
                ],
                "Arbitrary code execution with the application's privileges.".to_string(),
                "Replace dynamic evaluation with a safe parser for the expected input shape (for example a literal/JSON parser or an explicit dispatch table).".to_string(),
                rce_snippet(req.language),
                "Parsing the expected data shape accepts the same well-formed inputs while rejecting executable payloads.".to_string(),
                Confidence::High,
            ),
            VulnCategory::CommandInjection => (
                "Shell command built from untrusted input".to_string(),
                format!(
                    "`{name}` passes a shell-interpreted command through `{}`{site_note}; shell metacharacters in the input append attacker commands.",
                    primary.excerpt
                ),
                vec![
                    format!("Provide input containing a shell separator (for example `; rm -rf ~` or `$(...)`) to `{name}`"),
                    "The shell parses the separator and runs the attacker's command after the intended one".to_string(),
                    "Chain further commands to establish persistence or exfiltrate data".to_string(),
                ],
                "Arbitrary command execution on the host with the service's privileges.".to_string(),
                "Invoke the program directly with an argument vector (no shell), validate arguments against an allow-list, and avoid shell=True-style interpolation.".to_string(),
                cmdi_snippet(req.language),
                "Passing the same arguments as a vector preserves the intended invocation; only shell parsing of metacharacters is removed.".to_string(),
                Confidence::High,
            ),
            VulnCategory::PathTraversal => (
                "File path assembled from untrusted input".to_string(),
                format!(
                    "`{name}` opens a path assembled around `{}`{site_note} without canonicalization, so `..` sequences escape the intended directory.",
                    primary.excerpt
                ),
                vec![
                    "Request a file name containing traversal sequences such as `../../etc/passwd`".to_string(),
                    "The concatenated path resolves outside the intended base directory".to_string(),
                    "Read (or overwrite) files the service can access".to_string(),
                ],
                "Disclosure or modification of files outside the intended directory.".to_string(),
                "Resolve the combined path to its canonical form and reject it unless it stays under the allow-listed base directory.".to_string(),
                None,
                "Legitimate names inside the base directory resolve exactly as before; only escaping paths are rejected.".to_string(),
                Confidence::High,
            ),
            VulnCategory::InsecureDeserialization => (
                "Untrusted data deserialized into live objects".to_string(),
                format!(
                    "`{name}` deserializes attacker-controllable bytes via `{}`{site_note}; serialized payloads can construct gadget objects that execute code.",
                    primary.excerpt
                ),
                vec![
                    "Craft a serialized payload whose object graph triggers code on load (reduce/readObject gadgets)".to_string(),
                    "Submit the payload where the application expects serialized data".to_string(),
                    "Deserialization instantiates the gadget chain and executes the attacker's code".to_string(),
                ],
                "Arbitrary code execution during deserialization.".to_string(),
                "Switch to a data-only format such as JSON, or restrict the loader to an explicit allow-list of types.".to_string(),
                deser_snippet(req.language),
                "Data-only decoding yields the same structured values for legitimate payloads without instantiating arbitrary classes.".to_string(),
                Confidence::Medium,
            ),
            VulnCategory::HardcodedCredentials => (
                "Credential embedded in source".to_string(),
                format!(
                    "`{name}` embeds a literal credential near `{}`{site_note}; anyone with repository or binary access can read and reuse it.",
                    primary.excerpt
                ),
                vec![
                    "Obtain the source, build artifact, or version-control history".to_string(),
                    "Extract the literal credential value".to_string(),
                    "Authenticate to the protected service as the application".to_string(),
                ],
                "Unauthorized access to the guarded service or data.".to_string(),
                "Move the secret to an environment variable or secret manager, load it at startup, and rotate the exposed value.".to_string(),
                None,
                "The application reads the same value at runtime from configuration; call sites are unchanged.".to_string(),
                Confidence::Medium,
            ),
            VulnCategory::Backdoor => (
                "Hidden access path bypassing authentication".to_string(),
                format!(
                    "`{name}` contains a hidden branch around `{}`{site_note} that grants access outside the normal authentication flow.",
                    primary.excerpt
                ),
                vec![
                    "Discover the hidden trigger value (literal comparison or covert channel) from source or traffic analysis".to_string(),
                    "Present the trigger to the affected entry point".to_string(),
                    "The branch bypasses authentication or spawns a covert channel, granting persistent access".to_string(),
                ],
                "Unauthenticated, persistent access to the system.".to_string(),
                "Remove the hidden branch entirely; all access must flow through the standard authenticated path with audited credentials.".to_string(),
                None,
                "Legitimate users authenticate exactly as before; only the covert path is removed.".to_string(),
                Confidence::Medium,
            ),
            VulnCategory::LogicBomb => (
                "Time-triggered destructive branch".to_string(),
                format!(
                    "`{name}` guards a destructive operation with a clock or date comparison near `{}`{site_note}; it lies dormant until the trigger condition is met.",
                    primary.excerpt
                ),
                vec![
                    "The code ships and runs normally while the date condition is false".to_string(),
                    "When the clock passes the trigger, the guarded branch activates without any external input".to_string(),
                    "The destructive payload (deletion, truncation) executes with the application's privileges".to_string(),
                ],
                "Data destruction or service sabotage at a future time.".to_string(),
                "Remove the time-triggered destructive branch; destructive maintenance must be an explicit, operator-invoked and audited action.".to_string(),
                None,
                "Normal-path behavior is unchanged; only the dormant destructive trigger is removed.".to_string(),
                Confidence::Medium,
            ),
            VulnCategory::PrivilegeEscalation => (
                "Privilege level derived from untrusted input".to_string(),
                format!(
                    "`{name}` elevates privileges based on data near `{}`{site_note} that an attacker can influence (request fields, world-writable modes, or uid changes).",
                    primary.excerpt
                ),
                vec![
                    "Supply the privileged value (for example a role field set to `admin`) in a request, or exploit the relaxed permission".to_string(),
                    "The application trusts the value and raises the session's privilege level".to_string(),
                    "Use the elevated privileges to reach administrative functions or data".to_string(),
                ],
                "Vertical privilege escalation to administrative capability.".to_string(),
                "Derive authorization exclusively from server-side state; never accept privilege fields from clients, and drop permissive modes to least privilege.".to_string(),
                None,
                "Authorized administrators keep their access via server-side role state; only the client-controlled escalation is removed.".to_string(),
                Confidence::Medium,
            ),
        };

    Finding::new(
        category,
        title,
        explanation,
        vector,
        ExploitTrace {
            entry_point: entry,
            steps,
            impact,
        },
        Remediation {
            recommendation,
            patched_snippet: snippet,
            preserves_functionality_note: note,
        },
        confidence,
    )
}

fn sql_snippet(lang: LanguageId) -> Option<String> {
    let s = match lang {
        LanguageId::Python => {
            "cursor.execute(\"SELECT * FROM users WHERE id = ?\", (user_id,))"
        }
        LanguageId::Java => {
            "PreparedStatement ps = conn.prepareStatement(\"SELECT * FROM users WHERE id = ?\");\nps.setString(1, userId);\nResultSet rs = ps.executeQuery();"
        }
        LanguageId::JavaScript | LanguageId::TypeScript => {
            "db.query(\"SELECT * FROM users WHERE id = ?\", [userId], callback)"
        }
        LanguageId::Php => "$stmt = $db->prepare(\"SELECT * FROM users WHERE id = ?\");\n$stmt->bind_param(\"s\", $id);",
        _ => return None,
    };
    Some(s.to_string())
}

fn xss_snippet(lang: LanguageId) -> Option<String> {
    match lang {
        LanguageId::JavaScript | LanguageId::TypeScript => {
            Some("element.textContent = userContent;".to_string())
        }
        LanguageId::Python => Some(
            "from markupsafe import escape\nrender_template(\"page.html\", comment=escape(comment))"
                .to_string(),
        ),
        _ => None,
    }
}

fn rce_snippet(lang: LanguageId) -> Option<String> {
    match lang {
        LanguageId::Python => Some("import ast\nvalue = ast.literal_eval(expr)".to_string()),
        LanguageId::JavaScript | LanguageId::TypeScript => {
            Some("const value = JSON.parse(payload);".to_string())
        }
        _ => None,
    }
}

fn cmdi_snippet(lang: LanguageId) -> Option<String> {
    match lang {
        LanguageId::Python => Some(
            "subprocess.run([\"ping\", \"-c\", \"1\", host], shell=False, check=True)".to_string(),
        ),
        LanguageId::JavaScript | LanguageId::TypeScript => Some(
            "const { execFile } = require(\"child_process\");\nexecFile(\"ping\", [\"-c\", \"1\", host], callback);"
                .to_string(),
        ),
        _ => None,
    }
}

fn deser_snippet(lang: LanguageId) -> Option<String> {
    match lang {
        LanguageId::Python => Some("data = json.loads(blob)".to_string()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BackendTask;
    use crate::componentizer::{CodeComponent, ComponentKind, Span};

    fn request(kind: ComponentKind, name: &str, source: &str) -> BackendRequest {
        BackendRequest {
            task: BackendTask::Summarize,
            component: CodeComponent {
                id: "c0".into(),
                kind,
                name: name.into(),
                span: Span {
                    start: 0,
                    end: source.len(),
                },
                parent_id: None,
                source: source.into(),
                summary: None,
            },
            indicators: Vec::new(),
            language: crate::lang::LanguageId::Python,
            token_budget: 3072,
            context_summary: None,
        }
    }

    #[test]
    fn summarize_names_component_and_mentions_returns() {
        let backend = RuleBackend::new();
        let req = request(
            ComponentKind::Function,
            "add",
            "def add(a, b):\n    return a + b\n",
        );
        let summary = backend.summarize(&req).unwrap();
        assert!(summary.contains("add"));
        assert!(summary.contains("returns"));
    }

    #[test]
    fn empty_source_gets_a_generic_fragment_summary() {
        let backend = RuleBackend::new();
        let req = request(ComponentKind::ModuleFragment, "fragment_0", "   \n");
        let summary = backend.summarize(&req).unwrap();
        assert!(!summary.is_empty());
        assert!(summary.to_lowercase().contains("empty"));
    }

    #[test]
    fn analyze_without_indicators_reports_nothing() {
        let backend = RuleBackend::new();
        let mut req = request(ComponentKind::Function, "f", "def f():\n    return 1\n");
        req.task = BackendTask::Analyze;
        let report = backend.analyze(&req).unwrap();
        assert!(report.findings.is_empty());
        assert_eq!(report.backend_id, "rules");
    }

    #[test]
    fn identical_requests_are_byte_identical() {
        let backend = RuleBackend::new();
        let mut req = request(ComponentKind::Function, "f", "eval(x)\n");
        req.task = BackendTask::Analyze;
        req.indicators.push(crate::prescore::Indicator {
            rule_id: "rce-python-eval".into(),
            category: VulnCategory::RemoteCodeExecution,
            span: Span { start: 0, end: 4 },
            excerpt: "eval".into(),
            vector: crate::cvss::CvssVector::parse(
                "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
            )
            .unwrap(),
        });
        let a = backend.analyze(&req).unwrap();
        let b = backend.analyze(&req).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.findings.len(), 1);
        assert!(a.findings[0]
            .exploit_trace
            .entry_point
            .contains("eval(x)"));
    }
}
