//! Phase-1 decomposition: split a source file into independent functional
//! components with stable identifiers and byte spans.
//!
//! Registered languages get declaration-level segmentation (top-level
//! functions and classes plus their immediate methods); everything between
//! declarations is grouped into residual `module_fragment` components.
//! Unregistered languages flow through fixed-size fallback fragmentation, so
//! the pipeline never aborts on input it cannot parse.

mod brace;
mod mask;
mod python;
mod ruby;

use crate::hash::{sha256_hex, short_id};
use crate::lang::LanguageId;
use serde::{Deserialize, Serialize};
use std::ops::Range;
use thiserror::Error;

/// Default fallback fragment size. Stays comfortably under the 3072-token
/// budget at the 3-bytes-per-token estimate.
pub const DEFAULT_FRAGMENT_BYTES: usize = 8 * 1024;

/// A source file ready for decomposition. `content_hash` is a pure function
/// of the content bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub language: LanguageId,
    pub content: String,
    pub content_hash: String,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, language: LanguageId, content: impl Into<String>) -> Self {
        let content = content.into();
        let content_hash = sha256_hex(content.as_bytes());
        SourceFile {
            path: path.into(),
            language,
            content,
            content_hash,
        }
    }

    /// Build from raw bytes, decoding as UTF-8 with replacement. Returns the
    /// file plus a warning when undecodable bytes were replaced. The hash is
    /// computed over the original bytes.
    pub fn from_bytes(path: impl Into<String>, language: LanguageId, bytes: &[u8]) -> (Self, Option<String>) {
        let path = path.into();
        let content_hash = sha256_hex(bytes);
        match String::from_utf8(bytes.to_vec()) {
            Ok(content) => (
                SourceFile {
                    path,
                    language,
                    content,
                    content_hash,
                },
                None,
            ),
            Err(e) => {
                let content = String::from_utf8_lossy(e.as_bytes()).into_owned();
                let warning = format!("{path}: replaced undecodable bytes during UTF-8 decoding");
                (
                    SourceFile {
                        path,
                        language,
                        content,
                        content_hash,
                    },
                    Some(warning),
                )
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Function,
    Method,
    Class,
    ModuleFragment,
}

impl ComponentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ComponentKind::Function => "function",
            ComponentKind::Method => "method",
            ComponentKind::Class => "class",
            ComponentKind::ModuleFragment => "module_fragment",
        }
    }
}

/// Byte range `[start, end)` into the file content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// One decomposed functional unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeComponent {
    pub id: String,
    pub kind: ComponentKind,
    pub name: String,
    pub span: Span,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    /// Exact text slice; excluded from serialized reports (recoverable via
    /// the span).
    #[serde(skip)]
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<String>,
}

impl CodeComponent {
    fn build(
        file_path: &str,
        content: &str,
        kind: ComponentKind,
        name: Option<String>,
        span: Span,
        parent_id: Option<String>,
    ) -> CodeComponent {
        let id = component_id(file_path, &span, kind);
        let name = name.unwrap_or_else(|| synthesized_name(kind, span.start));
        CodeComponent {
            id,
            kind,
            name,
            span,
            parent_id,
            source: content[span.start..span.end].to_string(),
            summary: None,
        }
    }
}

/// Deterministic component identifier: hash of file path + span + kind.
pub fn component_id(path: &str, span: &Span, kind: ComponentKind) -> String {
    short_id(&[
        path,
        &span.start.to_string(),
        &span.end.to_string(),
        kind.as_str(),
    ])
}

fn synthesized_name(kind: ComponentKind, start: usize) -> String {
    let prefix = match kind {
        ComponentKind::Function => "function",
        ComponentKind::Method => "method",
        ComponentKind::Class => "class",
        ComponentKind::ModuleFragment => "fragment",
    };
    format!("{prefix}_{start}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {path} at byte {position}")]
pub struct ParseFailure {
    pub path: String,
    pub position: usize,
}

/// Intermediate declaration produced by the per-language segmenters.
#[derive(Debug, Clone)]
pub(crate) struct RawDecl {
    pub kind: ComponentKind,
    pub name: Option<String>,
    pub start: usize,
    pub end: usize,
    pub children: Vec<RawDecl>,
    /// Members are hoisted to the parent level (namespaces).
    pub transparent: bool,
}

/// Decompose a file into components, sorted by span start.
///
/// Top-level declarations become `function`/`class` components with their
/// immediate methods as children; residual statements between declarations
/// are grouped into `module_fragment`s. Unknown languages fragment directly.
/// On a parse failure the caller must degrade to [`fallback_fragment`];
/// a scan never aborts because of one unparseable file.
pub fn decompose(file: &SourceFile) -> Result<Vec<CodeComponent>, ParseFailure> {
    if file.content.is_empty() {
        return Ok(Vec::new());
    }
    let fail = |position: usize| ParseFailure {
        path: file.path.clone(),
        position,
    };
    let decls = match file.language {
        LanguageId::Unknown => {
            return Ok(fallback_fragment(file, DEFAULT_FRAGMENT_BYTES));
        }
        LanguageId::Python => python::segment(&file.content),
        LanguageId::Ruby => ruby::segment(&file.content).map_err(fail)?,
        lang => brace::segment(&file.content, lang).map_err(fail)?,
    };
    Ok(assemble(file, decls))
}

fn assemble(file: &SourceFile, mut decls: Vec<RawDecl>) -> Vec<CodeComponent> {
    decls.sort_by_key(|d| d.start);
    let content = &file.content;
    let mut components = Vec::new();
    let mut cursor = 0usize;

    for decl in decls {
        debug_assert!(decl.start >= cursor && decl.end <= content.len());
        if decl.start < cursor || decl.end > content.len() || decl.end <= decl.start {
            continue; // defensive clamp; segmenters should never produce this
        }
        push_residue(&mut components, file, cursor..decl.start);
        let span = Span {
            start: decl.start,
            end: decl.end,
        };
        let parent =
            CodeComponent::build(&file.path, content, decl.kind, decl.name, span, None);
        let parent_id = parent.id.clone();
        components.push(parent);
        let mut children = decl.children;
        children.sort_by_key(|c| c.start);
        for child in children {
            if child.start < span.start || child.end > span.end || child.end <= child.start {
                continue;
            }
            let child_span = Span {
                start: child.start,
                end: child.end,
            };
            components.push(CodeComponent::build(
                &file.path,
                content,
                child.kind,
                child.name,
                child_span,
                Some(parent_id.clone()),
            ));
        }
        cursor = decl.end;
    }
    push_residue(&mut components, file, cursor..content.len());
    components.sort_by_key(|c| c.span.start);
    components
}

/// Group a residual gap into module_fragment components, trimmed to its
/// non-whitespace extent and split at the fallback size.
fn push_residue(components: &mut Vec<CodeComponent>, file: &SourceFile, gap: Range<usize>) {
    let content = &file.content;
    let bytes = content.as_bytes();
    let mut start = gap.start;
    let mut end = gap.end;
    while start < end && bytes[start].is_ascii_whitespace() {
        start += 1;
    }
    while end > start && bytes[end - 1].is_ascii_whitespace() {
        end -= 1;
    }
    if start >= end {
        return;
    }
    for range in fragment_ranges(content, start..end, DEFAULT_FRAGMENT_BYTES) {
        components.push(CodeComponent::build(
            &file.path,
            content,
            ComponentKind::ModuleFragment,
            None,
            Span {
                start: range.start,
                end: range.end,
            },
            None,
        ));
    }
}

/// Partition the whole file into `module_fragment` components of at most
/// `max_bytes`, splitting preferentially at blank-line boundaries. The
/// concatenation of fragment sources reproduces the file exactly.
pub fn fallback_fragment(file: &SourceFile, max_bytes: usize) -> Vec<CodeComponent> {
    assert!(max_bytes > 0, "max_bytes must be positive");
    let content = &file.content;
    if content.is_empty() {
        return Vec::new();
    }
    fragment_ranges(content, 0..content.len(), max_bytes)
        .into_iter()
        .map(|range| {
            CodeComponent::build(
                &file.path,
                content,
                ComponentKind::ModuleFragment,
                None,
                Span {
                    start: range.start,
                    end: range.end,
                },
                None,
            )
        })
        .collect()
}

/// Split `range` into sub-ranges of at most `max_bytes`, preferring to cut
/// just after a blank line. Hard cuts round down to a char boundary; a cut
/// may exceed `max_bytes` only when a single char is wider than the budget.
pub(crate) fn fragment_ranges(content: &str, range: Range<usize>, max_bytes: usize) -> Vec<Range<usize>> {
    debug_assert!(max_bytes > 0);
    let bytes = content.as_bytes();
    let mut out = Vec::new();
    let mut start = range.start;
    while start < range.end {
        if range.end - start <= max_bytes {
            out.push(start..range.end);
            break;
        }
        let window_end = start + max_bytes;
        let mut cut = last_blank_line_boundary(bytes, start, window_end);
        if cut.is_none() {
            // Hard split at the window edge, rounded down to a char boundary.
            let mut p = window_end;
            while p > start && !content.is_char_boundary(p) {
                p -= 1;
            }
            if p <= start {
                // One oversized char; step forward to its end.
                p = window_end;
                while p < range.end && !content.is_char_boundary(p) {
                    p += 1;
                }
            }
            cut = Some(p);
        }
        let cut = cut.unwrap();
        debug_assert!(cut > start);
        out.push(start..cut);
        start = cut;
    }
    out
}

/// The last line-start position in `(start, limit]` preceded by a blank line.
fn last_blank_line_boundary(bytes: &[u8], start: usize, limit: usize) -> Option<usize> {
    let mut best = None;
    let mut line_start = start;
    let mut i = start;
    while i < limit {
        if bytes[i] == b'\n' {
            let line = &bytes[line_start..i];
            let blank = line.iter().all(|b| b.is_ascii_whitespace());
            let next_start = i + 1;
            if blank && next_start <= limit {
                best = Some(next_start);
            }
            line_start = next_start;
        }
        i += 1;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(lang: LanguageId, content: &str) -> SourceFile {
        SourceFile::new("test.src", lang, content)
    }

    #[test]
    fn empty_file_has_no_components() {
        let f = file(LanguageId::Python, "");
        assert!(decompose(&f).unwrap().is_empty());
        assert!(fallback_fragment(&f, 100).is_empty());
    }

    #[test]
    fn two_top_level_functions_in_order() {
        let src = "def a():\n    return 1\n\n\ndef b():\n    return 2\n";
        let f = file(LanguageId::Python, src);
        let comps = decompose(&f).unwrap();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].name, "a");
        assert_eq!(comps[1].name, "b");
        assert!(comps.iter().all(|c| c.kind == ComponentKind::Function));
        assert!(comps[0].span.end <= comps[1].span.start);
        for c in &comps {
            assert_eq!(c.source, &src[c.span.start..c.span.end]);
        }
    }

    #[test]
    fn class_with_two_methods_nests() {
        let src = "class T:\n    def m1(self):\n        return 1\n\n    def m2(self):\n        return 2\n";
        let f = file(LanguageId::Python, src);
        let comps = decompose(&f).unwrap();
        assert_eq!(comps.len(), 3);
        let class = &comps[0];
        assert_eq!(class.kind, ComponentKind::Class);
        assert_eq!(class.name, "T");
        for m in &comps[1..] {
            assert_eq!(m.kind, ComponentKind::Method);
            assert_eq!(m.parent_id.as_deref(), Some(class.id.as_str()));
            assert!(class.span.contains(&m.span));
        }
        assert_eq!(comps[1].name, "m1");
        assert_eq!(comps[2].name, "m2");
        assert!(!comps[1].span.overlaps(&comps[2].span));
    }

    #[test]
    fn residue_becomes_module_fragments() {
        let src = "import os\n\ndef f():\n    pass\n\nprint(f())\n";
        let f = file(LanguageId::Python, src);
        let comps = decompose(&f).unwrap();
        let kinds: Vec<_> = comps.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ComponentKind::ModuleFragment,
                ComponentKind::Function,
                ComponentKind::ModuleFragment
            ]
        );
        assert_eq!(comps[0].source, "import os");
        assert_eq!(comps[2].source, "print(f())");
    }

    #[test]
    fn decompose_is_deterministic() {
        let src = "def a():\n    return 1\n\nclass B:\n    def m(self):\n        pass\n";
        let f = file(LanguageId::Python, src);
        let a = decompose(&f).unwrap();
        let b = decompose(&f).unwrap();
        assert_eq!(a, b);
        let ids: Vec<_> = a.iter().map(|c| c.id.clone()).collect();
        let ids2: Vec<_> = decompose(&f).unwrap().iter().map(|c| c.id.clone()).collect();
        assert_eq!(ids, ids2);
    }

    #[test]
    fn unknown_language_fragments() {
        let src = "SOME UNKNOWN LANGUAGE\nwith lines\n";
        let f = file(LanguageId::Unknown, src);
        let comps = decompose(&f).unwrap();
        assert!(!comps.is_empty());
        assert!(comps.iter().all(|c| c.kind == ComponentKind::ModuleFragment));
        let joined: String = comps.iter().map(|c| c.source.as_str()).collect();
        assert_eq!(joined, src);
    }

    #[test]
    fn fallback_single_chunk() {
        let f = file(LanguageId::Unknown, "0123456789");
        let comps = fallback_fragment(&f, 100);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].span, Span { start: 0, end: 10 });
    }

    #[test]
    fn fallback_splits_at_blank_line() {
        // ~270 bytes with one blank line near byte 108; the first cut lands
        // on the blank-line boundary and concatenation reproduces the file.
        let mut src = String::new();
        for i in 0..4 {
            src.push_str(&format!("line number {i:03} padded out\n"));
        }
        src.push('\n');
        for i in 4..10 {
            src.push_str(&format!("line number {i:03} padded out\n"));
        }
        let f = file(LanguageId::Unknown, &src);
        let comps = fallback_fragment(&f, 128);
        assert!(comps.len() >= 2);
        assert!(comps.iter().all(|c| c.span.len() <= 128));
        let joined: String = comps.iter().map(|c| c.source.as_str()).collect();
        assert_eq!(joined, src);
        // First cut is exactly after the blank line.
        assert_eq!(&src[comps[0].span.end - 2..comps[0].span.end], "\n\n");
    }

    #[test]
    fn ids_are_stable_for_unchanged_files() {
        let src = "def a():\n    return 1\n";
        let f1 = SourceFile::new("x.py", LanguageId::Python, src);
        let f2 = SourceFile::new("x.py", LanguageId::Python, src);
        assert_eq!(
            decompose(&f1).unwrap()[0].id,
            decompose(&f2).unwrap()[0].id
        );
        // Different path, different id.
        let f3 = SourceFile::new("y.py", LanguageId::Python, src);
        assert_ne!(
            decompose(&f1).unwrap()[0].id,
            decompose(&f3).unwrap()[0].id
        );
    }

    #[test]
    fn lossy_decode_warns() {
        let (_, warn) = SourceFile::from_bytes("bin.py", LanguageId::Python, b"def f():\xff\n    pass\n");
        assert!(warn.unwrap().contains("replaced undecodable bytes"));
        let (_, none) = SourceFile::from_bytes("ok.py", LanguageId::Python, b"def f():\n    pass\n");
        assert!(none.is_none());
    }
}
