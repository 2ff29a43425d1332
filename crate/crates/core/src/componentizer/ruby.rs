//! Keyword-block segmentation for Ruby: `def`/`class`/`module` ... `end`.
//!
//! Block nesting is tracked by counting opener keywords and `end` tokens over
//! code bytes. Openers like `if`/`while` count only in statement-initial
//! position, so trailing modifier forms (`return if x`) do not unbalance the
//! walk. Value-position `if` expressions and heredocs are not modeled.

use super::mask::{self, Backtick, SingleQuote, Syntax, CODE};
use super::{ComponentKind, RawDecl};

const RUBY_SYNTAX: Syntax = Syntax {
    line_comments: &["#"],
    block_comment: None,
    nested_block_comments: false,
    double_quote: true,
    single_quote: SingleQuote::Escaped,
    backtick: Backtick::Off,
    triple_quotes: false,
    rust_raw_strings: false,
    equals_block_comments: true,
};

const BLOCK_OPENERS: &[&str] = &[
    "def", "class", "module", "if", "unless", "case", "while", "until", "for", "begin",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokKind {
    Word,
    Punct(u8),
}

#[derive(Debug, Clone, Copy)]
struct Tok<'a> {
    kind: TokKind,
    text: &'a str,
    start: usize,
    end: usize,
    statement_initial: bool,
}

/// Tokenize code-class bytes into words and single puncts, tagging
/// statement-initial tokens (first on a line or right after `;`).
fn tokenize<'a>(src: &'a str, classes: &[u8]) -> Vec<Tok<'a>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut statement_start = true;
    while i < bytes.len() {
        let b = bytes[i];
        if classes[i] != CODE {
            i += 1;
            continue;
        }
        if b == b'\n' {
            statement_start = true;
            i += 1;
            continue;
        }
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        // Non-ASCII bytes count as word constituents: multibyte identifiers
        // tokenize whole, so `end` inside one never closes a block and no
        // slice can land mid-char.
        let word_byte = |b: u8| {
            b.is_ascii_alphanumeric() || b == b'_' || b == b'?' || b == b'!' || b >= 0x80
        };
        if b.is_ascii_alphabetic() || b == b'_' || b >= 0x80 {
            let start = i;
            while i < bytes.len() && classes[i] == CODE && word_byte(bytes[i]) {
                i += 1;
            }
            toks.push(Tok {
                kind: TokKind::Word,
                text: &src[start..i],
                start,
                end: i,
                statement_initial: statement_start,
            });
            statement_start = false;
            continue;
        }
        toks.push(Tok {
            kind: TokKind::Punct(b),
            text: &src[i..i + 1],
            start: i,
            end: i + 1,
            statement_initial: statement_start,
        });
        statement_start = b == b';';
        i += 1;
    }
    toks
}

pub fn segment(content: &str) -> Result<Vec<RawDecl>, usize> {
    let classes = mask::mask(content, &RUBY_SYNTAX);
    let toks = tokenize(content, &classes);
    let mut decls = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let tok = toks[i];
        let is_decl = tok.kind == TokKind::Word
            && tok.statement_initial
            && matches!(tok.text, "def" | "class" | "module")
            && line_indent(content, tok.start) == 0;
        if is_decl {
            let (mut decl, next) = parse_block(content, &toks, i, true)?;
            decl.start = attach_leading_comments(content, &classes, decl.start);
            decls.push(decl);
            i = next;
        } else {
            i += 1;
        }
    }
    Ok(decls)
}

/// Walk back over comment-only lines directly above `start` (no blank line
/// in between) so documentation travels with its declaration.
fn attach_leading_comments(src: &str, classes: &[u8], start: usize) -> usize {
    let bytes = src.as_bytes();
    let mut line_start = bytes[..start]
        .iter()
        .rposition(|&b| b == b'\n')
        .map(|p| p + 1)
        .unwrap_or(0);
    let mut attached = start;
    while line_start > 0 {
        let prev_start = bytes[..line_start - 1]
            .iter()
            .rposition(|&b| b == b'\n')
            .map(|p| p + 1)
            .unwrap_or(0);
        let line = &bytes[prev_start..line_start];
        let first = line.iter().position(|b| !b.is_ascii_whitespace());
        match first {
            Some(off) if classes[prev_start + off] == mask::COMMENT => {
                attached = prev_start;
                line_start = prev_start;
            }
            _ => break,
        }
    }
    attached
}

fn line_indent(src: &str, pos: usize) -> usize {
    let bytes = src.as_bytes();
    let line_start = bytes[..pos]
        .iter()
        .rposition(|&b| b == b'\n')
        .map(|p| p + 1)
        .unwrap_or(0);
    pos - line_start
}

/// Parse the block opened by the keyword at token `idx`. Returns the decl
/// and the index of the first token after it. `collect_methods` is set for
/// class/module bodies (one level only).
fn parse_block<'a>(
    src: &str,
    toks: &[Tok<'a>],
    idx: usize,
    top_level: bool,
) -> Result<(RawDecl, usize), usize> {
    let opener = toks[idx];
    let kind = match opener.text {
        "def" => {
            if top_level {
                ComponentKind::Function
            } else {
                ComponentKind::Method
            }
        }
        _ => ComponentKind::Class,
    };
    let name = toks.get(idx + 1).and_then(|t| {
        if t.kind == TokKind::Word {
            Some(t.text.to_string())
        } else {
            None
        }
    });

    // Endless method: `def f(args) = expr` has no `end`.
    if opener.text == "def" {
        if let Some(end_pos) = endless_def_end(src, toks, idx) {
            return Ok((
                RawDecl {
                    kind,
                    name,
                    start: opener.start,
                    end: end_pos,
                    children: Vec::new(),
                    transparent: false,
                },
                skip_tokens_until(toks, idx, end_pos),
            ));
        }
    }

    let collect_methods = kind == ComponentKind::Class;
    let mut children = Vec::new();
    let mut depth = 1i64;
    let mut i = idx + 1;
    let mut loop_line: Option<usize> = None; // line with while/until/for: its `do` is not a new block
    while i < toks.len() {
        let tok = toks[i];
        match tok.kind {
            TokKind::Word => {
                let initial = tok.statement_initial;
                match tok.text {
                    "def" | "class" | "module" if initial && depth == 1 && collect_methods => {
                        if tok.text == "def" {
                            let (child, next) = parse_block(src, toks, i, false)?;
                            children.push(child);
                            i = next;
                            continue;
                        }
                        // Nested types stay inside the parent's source.
                        depth += 1;
                    }
                    t if BLOCK_OPENERS.contains(&t) && initial => {
                        depth += 1;
                        if matches!(t, "while" | "until" | "for") {
                            loop_line = Some(line_of(src, tok.start));
                        }
                    }
                    "do" => {
                        if loop_line != Some(line_of(src, tok.start)) {
                            depth += 1;
                        }
                    }
                    "end" => {
                        let after_dot = i > 0
                            && matches!(toks[i - 1].kind, TokKind::Punct(b'.') | TokKind::Punct(b':'));
                        if !after_dot {
                            depth -= 1;
                            if depth == 0 {
                                return Ok((
                                    RawDecl {
                                        kind,
                                        name,
                                        start: opener.start,
                                        end: tok.end,
                                        children,
                                        transparent: false,
                                    },
                                    i + 1,
                                ));
                            }
                        }
                    }
                    _ => {}
                }
            }
            TokKind::Punct(_) => {}
        }
        i += 1;
    }
    Err(opener.start)
}

fn line_of(src: &str, pos: usize) -> usize {
    src.as_bytes()[..pos].iter().filter(|&&b| b == b'\n').count()
}

/// Detect `def name(args) = expr` / `def name = expr`; returns the end of
/// the line when present.
fn endless_def_end(src: &str, toks: &[Tok<'_>], def_idx: usize) -> Option<usize> {
    let bytes = src.as_bytes();
    let mut i = def_idx + 1;
    // name
    if toks.get(i).map(|t| t.kind) != Some(TokKind::Word) {
        return None;
    }
    i += 1;
    // optional parenthesized args
    if toks.get(i).map(|t| t.kind) == Some(TokKind::Punct(b'(')) {
        let mut depth = 0i64;
        while i < toks.len() {
            match toks[i].kind {
                TokKind::Punct(b'(') => depth += 1,
                TokKind::Punct(b')') => {
                    depth -= 1;
                    if depth == 0 {
                        i += 1;
                        break;
                    }
                }
                _ => {}
            }
            i += 1;
        }
    }
    let eq = toks.get(i)?;
    if eq.kind != TokKind::Punct(b'=') || toks.get(i + 1).map(|t| t.kind) == Some(TokKind::Punct(b'='))
    {
        return None;
    }
    // Same line as the def?
    if line_of(src, eq.start) != line_of(src, toks[def_idx].start) {
        return None;
    }
    let mut end = eq.end;
    while end < bytes.len() && bytes[end] != b'\n' {
        end += 1;
    }
    Some(end)
}

fn skip_tokens_until(toks: &[Tok<'_>], from: usize, pos: usize) -> usize {
    let mut i = from;
    while i < toks.len() && toks[i].start < pos {
        i += 1;
    }
    i
}
