//! Byte classification for source text: code, comment, or string literal.
//!
//! Segmentation never needs a full parse — it needs to know which bytes are
//! *code* so that brace matching and keyword detection ignore comments and
//! string contents. The mask is computed in one pass by a small state machine
//! configured per language.

/// Classification of each source byte.
pub const CODE: u8 = 0;
pub const COMMENT: u8 = 1;
pub const STR: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingleQuote {
    /// No single-quoted literals (the byte stays code).
    Off,
    /// Single-quoted string or char literal with backslash escapes.
    Escaped,
    /// Rust rules: `'a'` and `'\n'` are char literals, `'a` is a lifetime.
    RustLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backtick {
    Off,
    /// JS/TS template literal: backslash escapes, `${...}` stays inside.
    Template,
    /// Go raw string: no escapes.
    Raw,
}

/// Per-language lexical syntax relevant to masking.
#[derive(Debug, Clone, Copy)]
pub struct Syntax {
    pub line_comments: &'static [&'static str],
    pub block_comment: Option<(&'static str, &'static str)>,
    pub nested_block_comments: bool,
    pub double_quote: bool,
    pub single_quote: SingleQuote,
    pub backtick: Backtick,
    /// `"""` (and `'''` when single quotes are strings).
    pub triple_quotes: bool,
    /// Rust raw/byte string prefixes: `r"…"`, `r#"…"#`, `b"…"`, `br#"…"#`.
    pub rust_raw_strings: bool,
    /// Ruby `=begin` / `=end` comment blocks anchored at line starts.
    pub equals_block_comments: bool,
}

impl Syntax {
    pub const fn c_family(line: &'static [&'static str], nested: bool) -> Syntax {
        Syntax {
            line_comments: line,
            block_comment: Some(("/*", "*/")),
            nested_block_comments: nested,
            double_quote: true,
            single_quote: SingleQuote::Escaped,
            backtick: Backtick::Off,
            triple_quotes: false,
            rust_raw_strings: false,
            equals_block_comments: false,
        }
    }
}

fn starts_with_at(bytes: &[u8], pos: usize, pat: &str) -> bool {
    bytes[pos..].starts_with(pat.as_bytes())
}

fn at_line_start(bytes: &[u8], pos: usize) -> bool {
    pos == 0 || bytes[pos - 1] == b'\n'
}

/// Compute the byte-class mask for `content` under `syntax`.
///
/// Unterminated literals and comments extend to end of input rather than
/// failing; segmentation degrades gracefully on dirty files.
pub fn mask(content: &str, syntax: &Syntax) -> Vec<u8> {
    let bytes = content.as_bytes();
    let n = bytes.len();
    let mut classes = vec![CODE; n];
    let mut i = 0;

    'outer: while i < n {
        let b = bytes[i];

        // Line comments. Longest-match first so `//` wins over `/`.
        for lc in syntax.line_comments {
            if starts_with_at(bytes, i, lc) {
                while i < n && bytes[i] != b'\n' {
                    classes[i] = COMMENT;
                    i += 1;
                }
                continue 'outer;
            }
        }

        // Block comments.
        if let Some((open, close)) = syntax.block_comment {
            if starts_with_at(bytes, i, open) {
                let mut depth = 1usize;
                for _ in 0..open.len() {
                    classes[i] = COMMENT;
                    i += 1;
                }
                while i < n {
                    if syntax.nested_block_comments && starts_with_at(bytes, i, open) {
                        depth += 1;
                        for _ in 0..open.len() {
                            classes[i] = COMMENT;
                            i += 1;
                        }
                    } else if starts_with_at(bytes, i, close) {
                        depth -= 1;
                        for _ in 0..close.len() {
                            classes[i] = COMMENT;
                            i += 1;
                        }
                        if depth == 0 {
                            continue 'outer;
                        }
                    } else {
                        classes[i] = COMMENT;
                        i += 1;
                    }
                }
                continue 'outer;
            }
        }

        // Ruby =begin/=end blocks.
        if syntax.equals_block_comments && at_line_start(bytes, i) && starts_with_at(bytes, i, "=begin")
        {
            while i < n {
                if at_line_start(bytes, i) && starts_with_at(bytes, i, "=end") {
                    while i < n && bytes[i] != b'\n' {
                        classes[i] = COMMENT;
                        i += 1;
                    }
                    continue 'outer;
                }
                classes[i] = COMMENT;
                i += 1;
            }
            continue 'outer;
        }

        // Rust raw / byte strings: r"…", r#"…"#, b"…", br#"…"#.
        if syntax.rust_raw_strings && (b == b'r' || b == b'b') {
            if let Some(len) = rust_raw_string_len(&bytes[i..]) {
                for _ in 0..len {
                    classes[i] = STR;
                    i += 1;
                }
                continue 'outer;
            }
        }

        // Triple-quoted strings take precedence over single/double quotes.
        if syntax.triple_quotes && (b == b'"' || b == b'\'') {
            let delim = [b, b, b];
            if bytes[i..].starts_with(&delim) {
                let quote_ok = b == b'"' || syntax.single_quote != SingleQuote::Off;
                if quote_ok {
                    classes[i] = STR;
                    classes[i + 1] = STR;
                    classes[i + 2] = STR;
                    i += 3;
                    while i < n {
                        if bytes[i] == b'\\' && i + 1 < n {
                            classes[i] = STR;
                            classes[i + 1] = STR;
                            i += 2;
                            continue;
                        }
                        if bytes[i..].starts_with(&delim) {
                            classes[i] = STR;
                            classes[i + 1] = STR;
                            classes[i + 2] = STR;
                            i += 3;
                            continue 'outer;
                        }
                        classes[i] = STR;
                        i += 1;
                    }
                    continue 'outer;
                }
            }
        }

        if b == b'"' && syntax.double_quote {
            i = consume_quoted(bytes, &mut classes, i, b'"', true);
            continue;
        }

        if b == b'\'' {
            match syntax.single_quote {
                SingleQuote::Off => {}
                SingleQuote::Escaped => {
                    i = consume_quoted(bytes, &mut classes, i, b'\'', true);
                    continue;
                }
                SingleQuote::RustLike => {
                    if let Some(len) = rust_char_literal_len(content, i) {
                        for _ in 0..len {
                            classes[i] = STR;
                            i += 1;
                        }
                    } else {
                        // Lifetime marker; the quote itself stays code.
                        i += 1;
                    }
                    continue;
                }
            }
        }

        if b == b'`' {
            match syntax.backtick {
                Backtick::Off => {}
                Backtick::Template => {
                    i = consume_quoted(bytes, &mut classes, i, b'`', true);
                    continue;
                }
                Backtick::Raw => {
                    i = consume_quoted(bytes, &mut classes, i, b'`', false);
                    continue;
                }
            }
        }

        i += 1;
    }

    classes
}

/// Consume a quoted literal starting at `start` (which holds the delimiter).
/// Returns the index just past the closing delimiter (or end of input).
fn consume_quoted(bytes: &[u8], classes: &mut [u8], start: usize, delim: u8, escapes: bool) -> usize {
    let n = bytes.len();
    let mut i = start;
    classes[i] = STR;
    i += 1;
    while i < n {
        if escapes && bytes[i] == b'\\' && i + 1 < n {
            classes[i] = STR;
            classes[i + 1] = STR;
            i += 2;
            continue;
        }
        classes[i] = STR;
        if bytes[i] == delim {
            return i + 1;
        }
        // A raw newline ends a broken single-line literal; don't swallow the file.
        if bytes[i] == b'\n' && delim != b'`' {
            classes[i] = CODE;
            return i;
        }
        i += 1;
    }
    n
}

/// Length of a Rust raw/byte string literal starting at offset 0 of `rest`,
/// if one is present.
fn rust_raw_string_len(rest: &[u8]) -> Option<usize> {
    let mut j = 0;
    if rest.first() == Some(&b'b') {
        j += 1;
    }
    if rest.get(j) == Some(&b'r') {
        j += 1;
        let mut hashes = 0;
        while rest.get(j + hashes) == Some(&b'#') {
            hashes += 1;
        }
        if rest.get(j + hashes) != Some(&b'"') {
            return None;
        }
        let mut k = j + hashes + 1;
        while k < rest.len() {
            if rest[k] == b'"' && rest[k + 1..].len() >= hashes
                && rest[k + 1..k + 1 + hashes].iter().all(|&c| c == b'#')
            {
                return Some(k + 1 + hashes);
            }
            k += 1;
        }
        return Some(rest.len());
    }
    // Plain b"…" byte string.
    if j == 1 && rest.get(1) == Some(&b'"') {
        let mut k = 2;
        while k < rest.len() {
            if rest[k] == b'\\' {
                k += 2;
                continue;
            }
            if rest[k] == b'"' {
                return Some(k + 1);
            }
            k += 1;
        }
        return Some(rest.len());
    }
    None
}

/// Length of a Rust char literal (`'a'`, `'\n'`, `'\u{1F600}'`) at byte `i`,
/// or None when the quote starts a lifetime.
fn rust_char_literal_len(content: &str, i: usize) -> Option<usize> {
    let rest = &content[i + 1..];
    let mut chars = rest.char_indices();
    let (_, first) = chars.next()?;
    if first == '\\' {
        // Escape: scan to the closing quote on this line.
        for (off, c) in chars {
            if c == '\'' {
                return Some(1 + off + 1);
            }
            if c == '\n' {
                return None;
            }
        }
        return None;
    }
    if first == '\'' {
        return None; // '' is not a char literal
    }
    if let Some((off, c)) = chars.next() {
        if c == '\'' {
            return Some(1 + off + 1);
        }
    }
    None
}
