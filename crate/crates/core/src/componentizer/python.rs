//! Indentation-based segmentation for Python.
//!
//! Top-level `def`/`class` blocks (plus decorators and directly attached
//! comments) become components; methods are `def`s at the class body's base
//! indent. Multi-line strings, bracket continuations, and backslash
//! continuations are tracked so that a column-zero line inside them never
//! terminates a block.

use super::mask::{self, Backtick, SingleQuote, Syntax, CODE, COMMENT};
use super::{ComponentKind, RawDecl};

const PY_SYNTAX: Syntax = Syntax {
    line_comments: &["#"],
    block_comment: None,
    nested_block_comments: false,
    double_quote: true,
    single_quote: SingleQuote::Escaped,
    backtick: Backtick::Off,
    triple_quotes: true,
    rust_raw_strings: false,
    equals_block_comments: false,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LineKind {
    Blank,
    Comment,
    Code,
}

#[derive(Debug, Clone, Copy)]
struct Line {
    start: usize,
    end: usize, // exclusive, past the newline when present
    indent: usize,
    kind: LineKind,
    /// Continuation of the previous logical line (inside a string, bracket
    /// group, or after a trailing backslash).
    continuation: bool,
}

struct Lines<'a> {
    src: &'a str,
    lines: Vec<Line>,
}

pub fn segment(content: &str) -> Vec<RawDecl> {
    let lines = analyze(content);
    let mut decls = Vec::new();
    let mut i = 0;
    while i < lines.lines.len() {
        let line = lines.lines[i];
        if line.kind != LineKind::Code || line.continuation || line.indent != 0 {
            i += 1;
            continue;
        }
        if let Some((kind, header_idx)) = decl_at(&lines, i) {
            let start_idx = attach_start(&lines, i);
            let end_idx = block_end(&lines, header_idx, 0);
            let children = if kind == ComponentKind::Class {
                methods_of(&lines, header_idx, end_idx)
            } else {
                Vec::new()
            };
            decls.push(RawDecl {
                kind,
                name: decl_name(lines.src, &lines.lines[header_idx]),
                start: lines.lines[start_idx].start,
                end: lines.lines[end_idx].end,
                children,
                transparent: false,
            });
            i = end_idx + 1;
        } else {
            i += 1;
        }
    }
    decls
}

fn analyze(content: &str) -> Lines<'_> {
    let bytes = content.as_bytes();
    let classes = mask::mask(content, &PY_SYNTAX);
    let mut lines = Vec::new();
    let mut pos = 0;
    let mut depth = 0i64;
    let mut prev_backslash = false;
    while pos < bytes.len() {
        let start = pos;
        let mut end = pos;
        while end < bytes.len() && bytes[end] != b'\n' {
            end += 1;
        }
        if end < bytes.len() {
            end += 1;
        }

        let in_string = classes.get(start).copied() == Some(mask::STR);
        let continuation = in_string || depth > 0 || prev_backslash;

        let mut indent = 0;
        let mut first = None;
        for (off, &b) in bytes[start..end].iter().enumerate() {
            if b == b' ' || b == b'\t' {
                indent += 1;
            } else if b == b'\n' || b == b'\r' {
                break;
            } else {
                first = Some(start + off);
                break;
            }
        }
        let kind = match first {
            None => LineKind::Blank,
            Some(i) if classes[i] == COMMENT => LineKind::Comment,
            Some(_) => LineKind::Code,
        };

        // Update bracket depth and trailing-backslash state over code bytes.
        prev_backslash = false;
        for i in start..end {
            if classes[i] != CODE {
                continue;
            }
            match bytes[i] {
                b'(' | b'[' | b'{' => depth += 1,
                b')' | b']' | b'}' => depth -= 1,
                b'\\' => {
                    // Trailing backslash: nothing but the newline after it.
                    let rest = &bytes[i + 1..end];
                    if rest.iter().all(|&b| b == b'\n' || b == b'\r') {
                        prev_backslash = true;
                    }
                }
                _ => {}
            }
        }
        if depth < 0 {
            depth = 0;
        }

        lines.push(Line {
            start,
            end,
            indent,
            kind,
            continuation,
        });
        pos = end;
    }
    Lines {
        src: content,
        lines,
    }
}

/// Does line `i` begin a `def`/`async def`/`class` block, possibly after
/// decorators? Returns the component kind and the index of the `def`/`class`
/// line itself.
fn decl_at(lines: &Lines<'_>, i: usize) -> Option<(ComponentKind, usize)> {
    let line = lines.lines[i];
    let text = line_text(lines.src, &line);
    let trimmed = text.trim_start();
    if trimmed.starts_with('@') {
        // Decorator run: find the def/class it precedes.
        let base_indent = line.indent;
        let mut j = i + 1;
        while j < lines.lines.len() {
            let l = lines.lines[j];
            if l.continuation || l.kind == LineKind::Comment {
                j += 1;
                continue;
            }
            if l.kind == LineKind::Blank {
                return None; // decorators split from their target: treat as residue
            }
            if l.indent != base_indent {
                return None;
            }
            let t = line_text(lines.src, &l).trim_start().to_string();
            if t.starts_with('@') {
                j += 1;
                continue;
            }
            return leading_decl_keyword(&t).map(|k| (k, j));
        }
        return None;
    }
    leading_decl_keyword(trimmed).map(|k| (k, i))
}

fn leading_decl_keyword(trimmed: &str) -> Option<ComponentKind> {
    let first = first_word(trimmed);
    match first {
        "def" => Some(ComponentKind::Function),
        "class" => Some(ComponentKind::Class),
        "async" => {
            let rest = trimmed[5..].trim_start();
            if first_word(rest) == "def" {
                Some(ComponentKind::Function)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn first_word(s: &str) -> &str {
    let end = s
        .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .unwrap_or(s.len());
    &s[..end]
}

fn decl_name(src: &str, header: &Line) -> Option<String> {
    let text = line_text(src, header).trim_start();
    let rest = if let Some(r) = text.strip_prefix("async") {
        r.trim_start()
    } else {
        text
    };
    let rest = rest
        .strip_prefix("def")
        .or_else(|| rest.strip_prefix("class"))?
        .trim_start();
    let name = first_word(rest);
    if name.is_empty() {
        None
    } else {
        Some(name.to_string())
    }
}

/// Walk back over contiguous decorator/comment lines (no blank separation).
fn attach_start(lines: &Lines<'_>, decl_idx: usize) -> usize {
    let mut start = decl_idx;
    let mut j = decl_idx;
    while j > 0 {
        j -= 1;
        let l = lines.lines[j];
        match l.kind {
            LineKind::Blank => break,
            LineKind::Comment => start = j,
            LineKind::Code => {
                let t = line_text(lines.src, &l);
                if t.trim_start().starts_with('@') && !l.continuation {
                    start = j;
                } else {
                    break;
                }
            }
        }
    }
    start
}

/// Index of the last line belonging to the block headed at `header_idx` with
/// the given base indent. Trailing blanks and comments are excluded.
fn block_end(lines: &Lines<'_>, header_idx: usize, base_indent: usize) -> usize {
    let mut last_code = header_idx;
    let mut j = header_idx + 1;
    while j < lines.lines.len() {
        let l = lines.lines[j];
        match l.kind {
            LineKind::Blank => {}
            _ if l.continuation => last_code = j,
            LineKind::Comment => {}
            LineKind::Code => {
                if l.indent > base_indent {
                    last_code = j;
                } else {
                    break;
                }
            }
        }
        j += 1;
    }
    last_code
}

/// Immediate methods of a class block: `def`s at the body's base indent.
fn methods_of(lines: &Lines<'_>, class_idx: usize, class_end: usize) -> Vec<RawDecl> {
    // Base indent: first code line of the body.
    let mut body_indent = None;
    for l in &lines.lines[class_idx + 1..=class_end] {
        if l.kind == LineKind::Code && !l.continuation {
            body_indent = Some(l.indent);
            break;
        }
    }
    let Some(body_indent) = body_indent else {
        return Vec::new();
    };

    let mut methods = Vec::new();
    let mut i = class_idx + 1;
    while i <= class_end {
        let l = lines.lines[i];
        if l.kind != LineKind::Code || l.continuation || l.indent != body_indent {
            i += 1;
            continue;
        }
        if let Some((ComponentKind::Function, header_idx)) = decl_at(lines, i) {
            let start_idx = attach_start(lines, i);
            let mut end_idx = block_end(lines, header_idx, body_indent);
            if end_idx > class_end {
                end_idx = class_end;
            }
            methods.push(RawDecl {
                kind: ComponentKind::Method,
                name: decl_name(lines.src, &lines.lines[header_idx]),
                start: lines.lines[start_idx].start,
                end: lines.lines[end_idx].end,
                children: Vec::new(),
                transparent: false,
            });
            i = end_idx + 1;
        } else {
            i += 1;
        }
    }
    methods
}

fn line_text<'a>(src: &'a str, line: &Line) -> &'a str {
    src[line.start..line.end].trim_end_matches(['\n', '\r'])
}
