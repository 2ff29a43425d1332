//! Declaration segmentation for brace-delimited languages.
//!
//! A lexer-level scanner, not a parser: it tokenizes code bytes (per the
//! mask), recognizes declaration headers at the current nesting level, and
//! brace-matches to find their extent. Everything it does not recognize is
//! left for the caller to group into residual module fragments, so
//! mis-recognition degrades granularity, never correctness of spans.

use super::mask::{self, Backtick, SingleQuote, Syntax, CODE};
use super::{ComponentKind, RawDecl};
use crate::lang::LanguageId;

/// Per-language segmentation profile.
pub struct Profile {
    pub syntax: Syntax,
    /// Keywords that introduce a function-like declaration.
    fn_keywords: &'static [&'static str],
    /// Keywords that introduce a class-like declaration (type with a body).
    class_keywords: &'static [&'static str],
    /// Keywords transparently descended into at top level (namespaces).
    transparent_keywords: &'static [&'static str],
    /// Modifier tokens allowed before a declaration keyword.
    modifiers: &'static [&'static str],
    /// `const`/`let`/`var`-style keywords that may bind a function value.
    var_keywords: &'static [&'static str],
    /// Detect `type name(args) { ... }` functions at top level.
    ctype_top: bool,
    /// Detect `type name(args) { ... }` methods inside class bodies.
    ctype_methods: bool,
    /// `class Foo(x: Int)` with no body is a complete declaration.
    classes_may_lack_body: bool,
    /// `func (recv T) name(...)` receiver syntax.
    go_receivers: bool,
    /// `@Name(...)`-style annotations may precede declarations.
    at_annotations: bool,
    /// `#[...]`-style attributes may precede declarations.
    hash_attributes: bool,
    /// `[Attr]`-style attributes may precede declarations.
    bracket_attributes: bool,
}

const CONTROL_KEYWORDS: &[&str] = &[
    "if", "else", "for", "while", "do", "switch", "case", "default", "return", "break",
    "continue", "goto", "new", "delete", "throw", "throws", "try", "catch", "finally", "sizeof",
    "typeof", "instanceof", "in", "of", "assert", "yield", "await", "match", "when", "foreach",
    "lock", "using", "synchronized",
];

const C_SYNTAX: Syntax = Syntax::c_family(&["//"], false);
const NESTED_SYNTAX: Syntax = Syntax::c_family(&["//"], true);

impl Profile {
    pub fn for_language(lang: LanguageId) -> Profile {
        let base = Profile {
            syntax: C_SYNTAX,
            fn_keywords: &[],
            class_keywords: &[],
            transparent_keywords: &[],
            modifiers: &[],
            var_keywords: &[],
            ctype_top: false,
            ctype_methods: false,
            classes_may_lack_body: false,
            go_receivers: false,
            at_annotations: false,
            hash_attributes: false,
            bracket_attributes: false,
        };
        match lang {
            LanguageId::C => Profile {
                class_keywords: &["struct", "enum", "union"],
                modifiers: &["static", "extern", "inline", "const", "typedef", "register",
                    "volatile", "unsigned", "signed"],
                ctype_top: true,
                ..base
            },
            LanguageId::Cpp => Profile {
                syntax: NESTED_SYNTAX,
                class_keywords: &["class", "struct", "enum", "union"],
                transparent_keywords: &["namespace"],
                modifiers: &["static", "extern", "inline", "const", "constexpr", "consteval",
                    "constinit", "virtual", "explicit", "friend", "typedef", "template",
                    "unsigned", "signed", "volatile", "mutable", "noexcept", "export"],
                ctype_top: true,
                ctype_methods: true,
                ..base
            },
            LanguageId::Java => Profile {
                class_keywords: &["class", "interface", "enum", "record"],
                modifiers: &["public", "private", "protected", "static", "final", "abstract",
                    "synchronized", "native", "strictfp", "sealed", "transient", "volatile"],
                ctype_methods: true,
                at_annotations: true,
                ..base
            },
            LanguageId::CSharp => Profile {
                class_keywords: &["class", "interface", "enum", "struct", "record"],
                transparent_keywords: &["namespace"],
                modifiers: &["public", "private", "protected", "internal", "static", "readonly",
                    "sealed", "abstract", "virtual", "override", "async", "partial", "unsafe",
                    "extern", "new", "ref"],
                ctype_methods: true,
                bracket_attributes: true,
                ..base
            },
            LanguageId::Rust => Profile {
                syntax: Syntax {
                    single_quote: SingleQuote::RustLike,
                    rust_raw_strings: true,
                    ..NESTED_SYNTAX
                },
                fn_keywords: &["fn"],
                class_keywords: &["struct", "enum", "trait", "impl", "union"],
                modifiers: &["pub", "unsafe", "async", "const", "extern", "default"],
                hash_attributes: true,
                ..base
            },
            LanguageId::Go => Profile {
                syntax: Syntax {
                    backtick: Backtick::Raw,
                    ..C_SYNTAX
                },
                fn_keywords: &["func"],
                class_keywords: &["type"],
                go_receivers: true,
                ..base
            },
            LanguageId::Scala => Profile {
                syntax: Syntax {
                    triple_quotes: true,
                    ..NESTED_SYNTAX
                },
                fn_keywords: &["def"],
                class_keywords: &["class", "trait", "object", "enum"],
                modifiers: &["private", "protected", "abstract", "final", "sealed", "implicit",
                    "lazy", "override", "case", "inline", "transparent", "open"],
                var_keywords: &["val", "var"],
                classes_may_lack_body: true,
                at_annotations: true,
                ..base
            },
            LanguageId::JavaScript => Profile {
                syntax: Syntax {
                    backtick: Backtick::Template,
                    ..C_SYNTAX
                },
                fn_keywords: &["function"],
                class_keywords: &["class"],
                modifiers: &["export", "default", "async"],
                var_keywords: &["const", "let", "var"],
                ctype_methods: true,
                at_annotations: true,
                ..base
            },
            LanguageId::TypeScript => Profile {
                syntax: Syntax {
                    backtick: Backtick::Template,
                    ..C_SYNTAX
                },
                fn_keywords: &["function"],
                class_keywords: &["class", "interface", "enum"],
                transparent_keywords: &["namespace"],
                modifiers: &["export", "default", "async", "declare", "abstract", "public",
                    "private", "protected", "readonly", "static"],
                var_keywords: &["const", "let", "var"],
                ctype_methods: true,
                at_annotations: true,
                ..base
            },
            LanguageId::Php => Profile {
                syntax: Syntax::c_family(&["//", "#"], false),
                fn_keywords: &["function"],
                class_keywords: &["class", "interface", "trait", "enum"],
                modifiers: &["public", "private", "protected", "static", "final", "abstract",
                    "readonly"],
                at_annotations: true,
                ..base
            },
            LanguageId::Kotlin => Profile {
                syntax: Syntax {
                    triple_quotes: true,
                    ..NESTED_SYNTAX
                },
                fn_keywords: &["fun"],
                class_keywords: &["class", "interface", "object"],
                modifiers: &["public", "private", "protected", "internal", "open", "final",
                    "abstract", "override", "suspend", "operator", "inline", "data", "sealed",
                    "lateinit", "tailrec", "external", "annotation", "enum", "value"],
                classes_may_lack_body: true,
                at_annotations: true,
                ..base
            },
            LanguageId::Swift => Profile {
                syntax: Syntax {
                    triple_quotes: true,
                    ..NESTED_SYNTAX
                },
                fn_keywords: &["func", "init", "deinit", "subscript"],
                class_keywords: &["class", "struct", "enum", "protocol", "extension", "actor"],
                modifiers: &["public", "private", "internal", "fileprivate", "open", "static",
                    "final", "override", "mutating", "nonmutating", "convenience", "required",
                    "lazy", "weak", "unowned", "indirect", "dynamic"],
                at_annotations: true,
                ..base
            },
            // Callers route Python/Ruby/Unknown elsewhere; default keeps this total.
            _ => base,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    ClassBody,
}

/// Segment `content`, returning top-level declarations with method children.
/// The error value is the byte offset of an opening brace that never closes.
pub fn segment(content: &str, lang: LanguageId) -> Result<Vec<RawDecl>, usize> {
    let profile = Profile::for_language(lang);
    let m = mask::mask(content, &profile.syntax);
    let scanner = Scanner {
        src: content,
        bytes: content.as_bytes(),
        mask: &m,
        profile: &profile,
        lang,
    };
    scanner.scan_region(0, content.len(), Ctx::Top)
}

struct Scanner<'a> {
    src: &'a str,
    bytes: &'a [u8],
    mask: &'a [u8],
    profile: &'a Profile,
    lang: LanguageId,
}

#[derive(Debug, Clone, Copy)]
struct Ident<'a> {
    text: &'a str,
    start: usize,
    end: usize,
}

impl<'a> Scanner<'a> {
    fn is_code(&self, i: usize) -> bool {
        self.mask[i] == CODE
    }

    /// Skip whitespace and comment bytes. Returns the new position plus the
    /// start of the comment block attached to it (contiguous trailing
    /// comments with no blank line in between).
    fn skip_trivia(&self, mut i: usize, end: usize) -> (usize, Option<usize>) {
        let mut attached: Option<usize> = None;
        let mut newlines_since_comment = 0usize;
        while i < end {
            let b = self.bytes[i];
            if self.mask[i] == mask::COMMENT {
                if attached.is_none() || newlines_since_comment > 1 {
                    attached = Some(i);
                }
                newlines_since_comment = 0;
                i += 1;
            } else if b.is_ascii_whitespace() {
                if b == b'\n' {
                    newlines_since_comment += 1;
                    if newlines_since_comment > 1 {
                        attached = None;
                    }
                }
                i += 1;
            } else {
                break;
            }
        }
        if newlines_since_comment > 1 {
            attached = None;
        }
        (i, attached)
    }

    /// Skip whitespace and comments without attachment tracking.
    fn skip_ws(&self, i: usize, end: usize) -> usize {
        self.skip_trivia(i, end).0
    }

    fn read_ident(&self, i: usize) -> Option<Ident<'a>> {
        if i >= self.bytes.len() || !self.is_code(i) {
            return None;
        }
        let b = self.bytes[i];
        if !(b.is_ascii_alphabetic() || b == b'_' || b == b'$') {
            return None;
        }
        let mut j = i + 1;
        while j < self.bytes.len()
            && self.is_code(j)
            && (self.bytes[j].is_ascii_alphanumeric() || self.bytes[j] == b'_' || self.bytes[j] == b'$')
        {
            j += 1;
        }
        Some(Ident {
            text: &self.src[i..j],
            start: i,
            end: j,
        })
    }

    /// Next code byte at or after `i`, skipping trivia and string bytes.
    fn next_code(&self, mut i: usize, end: usize) -> Option<(usize, u8)> {
        loop {
            i = self.skip_ws(i, end);
            if i >= end {
                return None;
            }
            if self.is_code(i) {
                return Some((i, self.bytes[i]));
            }
            i += 1; // string byte
        }
    }

    /// Match a bracket pair starting at `open` (which holds the opener).
    /// Only code-class bytes count. Returns the index just past the closer.
    fn match_pair(&self, open: usize, end: usize, opener: u8, closer: u8) -> Option<usize> {
        debug_assert_eq!(self.bytes[open], opener);
        let mut depth = 1usize;
        let mut i = open + 1;
        while i < end {
            if self.is_code(i) {
                let b = self.bytes[i];
                if b == opener {
                    depth += 1;
                } else if b == closer {
                    depth -= 1;
                    if depth == 0 {
                        return Some(i + 1);
                    }
                }
            }
            i += 1;
        }
        None
    }

    fn scan_region(&self, start: usize, end: usize, ctx: Ctx) -> Result<Vec<RawDecl>, usize> {
        let mut decls = Vec::new();
        let mut pos = start;
        while pos < end {
            let (next, attached) = self.skip_trivia(pos, end);
            if next >= end {
                break;
            }
            match self.try_decl(next, end, ctx)? {
                Some(mut decl) => {
                    if let Some(comment_start) = attached {
                        decl.start = comment_start;
                    }
                    pos = decl.end;
                    if decl.transparent {
                        decls.extend(decl.children);
                    } else {
                        decls.push(decl);
                    }
                }
                None => {
                    pos = self.skip_statement(next, end);
                }
            }
        }
        Ok(decls)
    }

    /// Try to parse a declaration whose first token is at `pos`. Returns
    /// Ok(None) when the text there is not a recognizable declaration.
    fn try_decl(&self, pos: usize, end: usize, ctx: Ctx) -> Result<Option<RawDecl>, usize> {
        let mut cur = pos;

        // Attributes and annotations before the declaration proper.
        loop {
            cur = self.skip_ws(cur, end);
            if cur >= end {
                return Ok(None);
            }
            let b = self.bytes[cur];
            if !self.is_code(cur) {
                return Ok(None);
            }
            if self.profile.hash_attributes && b == b'#' {
                let Some((next, nb)) = self.next_code(cur + 1, end) else {
                    return Ok(None);
                };
                if nb == b'!' {
                    return Ok(None); // inner attribute, not declaration-bound
                }
                if nb != b'[' {
                    return Ok(None);
                }
                match self.match_pair(next, end, b'[', b']') {
                    Some(after) => {
                        cur = after;
                        continue;
                    }
                    None => return Ok(None),
                }
            }
            if self.profile.at_annotations && b == b'@' {
                let Some(ident) = self.read_ident(cur + 1) else {
                    return Ok(None);
                };
                if ident.text == "interface" {
                    return Ok(None); // annotation-type declarations stay residue
                }
                cur = ident.end;
                // Dotted annotation names and optional argument list.
                while let Some((p, b'.')) = self.next_code(cur, end) {
                    let Some(seg) = self.read_ident(p + 1) else { break };
                    cur = seg.end;
                }
                if let Some((p, b'(')) = self.next_code(cur, end) {
                    match self.match_pair(p, end, b'(', b')') {
                        Some(after) => cur = after,
                        None => return Ok(None),
                    }
                }
                continue;
            }
            if self.profile.bracket_attributes && b == b'[' {
                match self.match_pair(cur, end, b'[', b']') {
                    Some(after) => {
                        cur = after;
                        continue;
                    }
                    None => return Ok(None),
                }
            }
            break;
        }

        // Modifier tokens.
        let mut saw_typedef = false;
        loop {
            cur = self.skip_ws(cur, end);
            let Some(ident) = self.read_ident(cur) else { break };
            if !self.profile.modifiers.contains(&ident.text) {
                break;
            }
            // A modifier could itself be the function/class keyword in some
            // languages (Rust `const fn` vs `const X`); keyword test first.
            if self.profile.fn_keywords.contains(&ident.text)
                || self.profile.class_keywords.contains(&ident.text)
            {
                break;
            }
            saw_typedef |= ident.text == "typedef";
            cur = ident.end;
            match ident.text {
                "pub" => {
                    if let Some((p, b'(')) = self.next_code(cur, end) {
                        match self.match_pair(p, end, b'(', b')') {
                            Some(after) => cur = after,
                            None => return Ok(None),
                        }
                    }
                }
                "template" => {
                    if let Some((p, b'<')) = self.next_code(cur, end) {
                        match self.match_angle(p, end) {
                            Some(after) => cur = after,
                            None => return Ok(None),
                        }
                    }
                }
                "extern" => {
                    // extern "C"
                    if let Some(p) = self.peek_string(cur, end) {
                        cur = p;
                    }
                }
                _ => {}
            }
        }

        cur = self.skip_ws(cur, end);
        let Some(keyword) = self.read_ident(cur) else {
            // No leading identifier: only C-type functions remain possible.
            return self.try_ctype(pos, cur, end, ctx);
        };

        if self.profile.fn_keywords.contains(&keyword.text) {
            return self.parse_fn_decl(pos, keyword, end, ctx);
        }
        if self.profile.class_keywords.contains(&keyword.text) && ctx == Ctx::Top {
            return self.parse_class_decl(pos, keyword, end, saw_typedef);
        }
        if self.profile.transparent_keywords.contains(&keyword.text) && ctx == Ctx::Top {
            return self.parse_namespace(pos, keyword, end);
        }
        if self.profile.var_keywords.contains(&keyword.text) {
            return self.parse_var_fn(pos, keyword, end, ctx);
        }
        if ctx == Ctx::ClassBody && self.profile.class_keywords.contains(&keyword.text) {
            return Ok(None); // nested types stay inside the parent's source
        }

        self.try_ctype(pos, pos, end, ctx)
    }

    /// Function-like declaration introduced by a keyword (`fn`, `func`, ...).
    fn parse_fn_decl(
        &self,
        start: usize,
        keyword: Ident<'a>,
        end: usize,
        ctx: Ctx,
    ) -> Result<Option<RawDecl>, usize> {
        let mut cur = keyword.end;
        let mut kind = if ctx == Ctx::ClassBody {
            ComponentKind::Method
        } else {
            ComponentKind::Function
        };

        // Go method receivers: func (r *T) Name(...).
        if self.profile.go_receivers {
            if let Some((p, b'(')) = self.next_code(cur, end) {
                // Only a receiver if another identifier+paren follows.
                if let Some(after) = self.match_pair(p, end, b'(', b')') {
                    let is_receiver = self
                        .next_code(after, end)
                        .map(|(q, _)| self.read_ident(q).is_some())
                        .unwrap_or(false);
                    if is_receiver {
                        cur = after;
                        kind = ComponentKind::Method;
                    }
                }
            }
        }

        // `function* gen`, `function &byRef` decorations.
        while let Some((p, b)) = self.next_code(cur, end) {
            if b == b'*' || b == b'&' {
                cur = p + 1;
            } else {
                break;
            }
        }

        let name = match self.next_code(cur, end) {
            Some((p, _)) => match self.read_ident(p) {
                Some(ident) => {
                    cur = ident.end;
                    // Swift `init`/`deinit` are themselves the name.
                    Some(ident.text.to_string())
                }
                None => None,
            },
            None => None,
        };
        // Swift init/deinit/subscript keywords double as names.
        let name = name.or_else(|| {
            if keyword.text == "init" || keyword.text == "deinit" || keyword.text == "subscript" {
                Some(keyword.text.to_string())
            } else {
                None
            }
        });

        // `def f = expr` / `fun f() = expr` bodies exist only in Scala/Kotlin;
        // elsewhere a bare `=` in a signature (e.g. `Item = u32` bounds) must
        // not terminate the declaration.
        let allow_eq_body = matches!(self.lang, LanguageId::Scala | LanguageId::Kotlin);
        match self.find_body(cur, end, allow_eq_body)? {
            Some(body_end) => Ok(Some(RawDecl {
                kind,
                name,
                start,
                end: body_end,
                children: Vec::new(),
                transparent: false,
            })),
            None => Ok(None),
        }
    }

    /// Class-like declaration: `class`/`struct`/`impl`/`object`/`type`...
    fn parse_class_decl(
        &self,
        start: usize,
        keyword: Ident<'a>,
        end: usize,
        saw_typedef: bool,
    ) -> Result<Option<RawDecl>, usize> {
        let mut cur = keyword.end;

        // Go: `type Name struct|interface { ... }`; anything else is residue.
        if self.lang == LanguageId::Go {
            let Some((p, _)) = self.next_code(cur, end) else {
                return Ok(None);
            };
            let Some(name_ident) = self.read_ident(p) else {
                return Ok(None);
            };
            cur = name_ident.end;
            let Some((p2, _)) = self.next_code(cur, end) else {
                return Ok(None);
            };
            let Some(shape) = self.read_ident(p2) else {
                return Ok(None);
            };
            if shape.text != "struct" && shape.text != "interface" {
                return Ok(None);
            }
            let Some((bp, b'{')) = self.next_code(shape.end, end) else {
                return Ok(None);
            };
            let body_end = self.match_pair(bp, end, b'{', b'}').ok_or(bp)?;
            return Ok(Some(RawDecl {
                kind: ComponentKind::Class,
                name: Some(name_ident.text.to_string()),
                start,
                end: body_end,
                children: Vec::new(),
                transparent: false,
            }));
        }

        // Rust impl blocks: name is the full `impl ...` head.
        if keyword.text == "impl" {
            let mut i = cur;
            let mut brace = None;
            while i < end {
                if self.is_code(i) {
                    let b = self.bytes[i];
                    if b == b'{' {
                        brace = Some(i);
                        break;
                    }
                    if b == b';' {
                        return Ok(None);
                    }
                }
                i += 1;
            }
            let Some(bp) = brace else { return Ok(None) };
            let head = collapse_ws(self.src[cur..bp].trim());
            let body_end = self.match_pair(bp, end, b'{', b'}').ok_or(bp)?;
            let children = self.scan_region(bp + 1, body_end - 1, Ctx::ClassBody)?;
            return Ok(Some(RawDecl {
                kind: ComponentKind::Class,
                name: Some(collapse_ws(&format!("impl {head}"))),
                start,
                end: body_end,
                children,
                transparent: false,
            }));
        }

        // `enum class Color` and similar compound keywords: consume any
        // further class keywords before the name.
        let mut name;
        loop {
            name = self
                .next_code(cur, end)
                .and_then(|(p, _)| self.read_ident(p));
            match name {
                Some(ident)
                    if self.profile.class_keywords.contains(&ident.text)
                        || ident.text == "class"
                        || ident.text == "struct" =>
                {
                    cur = ident.end;
                }
                Some(ident) => {
                    cur = ident.end;
                    break;
                }
                None => break,
            }
        }

        // Scan to the body, tolerating inheritance clauses, generic
        // parameters, and primary constructors.
        let mut i = cur;
        let mut body: Option<(usize, usize)> = None; // (open, close_end)
        let mut terminator: Option<usize> = None;
        let mut pdepth = 0i32;
        while i < end {
            if self.is_code(i) {
                match self.bytes[i] {
                    b'(' | b'[' => pdepth += 1,
                    b')' | b']' => pdepth -= 1,
                    b'{' if pdepth == 0 => {
                        let close = self.match_pair(i, end, b'{', b'}').ok_or(i)?;
                        body = Some((i, close));
                        break;
                    }
                    b';' if pdepth == 0 => {
                        terminator = Some(i);
                        break;
                    }
                    b'\n' if pdepth == 0 && self.profile.classes_may_lack_body => {
                        // Kotlin/Scala bodyless class; ends at the newline.
                        terminator = Some(i);
                        break;
                    }
                    b'=' if pdepth == 0 => return Ok(None), // type alias
                    _ => {}
                }
            }
            i += 1;
        }

        let (decl_end, children) = match body {
            Some((open, close)) => {
                let children = self.scan_region(open + 1, close - 1, Ctx::ClassBody)?;
                let mut decl_end = close;
                // typedef struct { ... } name_t;  — the name trails the body.
                if saw_typedef {
                    let mut j = close;
                    let mut last_ident = None;
                    while let Some((p, b)) = self.next_code(j, end) {
                        if b == b';' {
                            decl_end = p + 1;
                            break;
                        }
                        match self.read_ident(p) {
                            Some(ident) => {
                                last_ident = Some(ident);
                                j = ident.end;
                            }
                            None => {
                                j = p + 1; // pointer stars etc.
                            }
                        }
                    }
                    if let Some(ident) = last_ident {
                        name = Some(ident);
                    }
                } else if let Some((p, b';')) = self.next_code(close, end) {
                    // `struct X { ... };` — the semicolon belongs to the decl.
                    if self.lang == LanguageId::C
                        || self.lang == LanguageId::Cpp
                        || self.lang == LanguageId::CSharp
                    {
                        decl_end = p + 1;
                    }
                }
                (decl_end, children)
            }
            None => match terminator {
                Some(t) if self.profile.classes_may_lack_body => (t, Vec::new()),
                // `struct Foo;` forward declarations are residue.
                _ => return Ok(None),
            },
        };

        if decl_end <= start {
            return Ok(None);
        }

        Ok(Some(RawDecl {
            kind: ComponentKind::Class,
            name: name.map(|n| n.text.to_string()),
            start,
            end: decl_end,
            children,
            transparent: false,
        }))
    }

    /// C++/C# namespaces: members are hoisted to the top level.
    fn parse_namespace(
        &self,
        start: usize,
        keyword: Ident<'a>,
        end: usize,
    ) -> Result<Option<RawDecl>, usize> {
        let mut i = keyword.end;
        let mut brace = None;
        while i < end {
            if self.is_code(i) {
                let b = self.bytes[i];
                if b == b'{' {
                    brace = Some(i);
                    break;
                }
                if b == b';' {
                    return Ok(None); // file-scoped C# namespace: keep scanning flat
                }
            }
            i += 1;
        }
        let Some(bp) = brace else { return Ok(None) };
        let close = self.match_pair(bp, end, b'{', b'}').ok_or(bp)?;
        let children = self.scan_region(bp + 1, close - 1, Ctx::Top)?;
        Ok(Some(RawDecl {
            kind: ComponentKind::ModuleFragment,
            name: None,
            start,
            end: close,
            children,
            transparent: true,
        }))
    }

    /// `const f = (...) => {...}` and friends.
    fn parse_var_fn(
        &self,
        start: usize,
        keyword: Ident<'a>,
        end: usize,
        ctx: Ctx,
    ) -> Result<Option<RawDecl>, usize> {
        let Some((p, _)) = self.next_code(keyword.end, end) else {
            return Ok(None);
        };
        let Some(name) = self.read_ident(p) else {
            return Ok(None);
        };
        // Optional TS type annotation before `=`.
        let mut i = name.end;
        let mut eq = None;
        let mut pdepth = 0i32;
        while i < end {
            if self.is_code(i) {
                match self.bytes[i] {
                    b'(' | b'[' | b'{' => pdepth += 1,
                    b')' | b']' | b'}' => pdepth -= 1,
                    b'=' if pdepth == 0 => {
                        if self.bytes.get(i + 1) == Some(&b'=') {
                            return Ok(None);
                        }
                        eq = Some(i);
                        break;
                    }
                    b';' | b'\n' if pdepth == 0 => return Ok(None),
                    _ => {}
                }
            }
            i += 1;
        }
        let Some(eq_pos) = eq else { return Ok(None) };

        // Scan the right-hand side; look for a top-depth arrow or a leading
        // `function` keyword to call this a function binding.
        let mut i = eq_pos + 1;
        let mut depth = 0i32;
        let mut is_function = false;
        let mut saw_content = false;
        let stmt_end;
        if let Some((p, _)) = self.next_code(i, end) {
            if let Some(first) = self.read_ident(p) {
                if first.text == "function" || first.text == "async" {
                    is_function = true;
                }
            }
        }
        loop {
            if i >= end {
                stmt_end = end;
                break;
            }
            if self.is_code(i) {
                let b = self.bytes[i];
                match b {
                    b'(' | b'[' | b'{' => depth += 1,
                    b')' | b']' | b'}' => depth -= 1,
                    b'=' if depth == 0 && self.bytes.get(i + 1) == Some(&b'>') => {
                        is_function = true;
                        i += 2;
                        continue;
                    }
                    b';' if depth == 0 => {
                        stmt_end = i + 1;
                        break;
                    }
                    b'\n' if depth == 0 && saw_content => {
                        stmt_end = i;
                        break;
                    }
                    _ => {}
                }
                if !b.is_ascii_whitespace() {
                    saw_content = true;
                }
            }
            i += 1;
        }

        if !is_function {
            return Ok(None);
        }
        Ok(Some(RawDecl {
            kind: if ctx == Ctx::ClassBody {
                ComponentKind::Method
            } else {
                ComponentKind::Function
            },
            name: Some(name.text.to_string()),
            start,
            end: stmt_end,
            children: Vec::new(),
            transparent: false,
        }))
    }

    /// C-style function/method: `type name(args) ... { body }`.
    fn try_ctype(
        &self,
        start: usize,
        mut cur: usize,
        end: usize,
        ctx: Ctx,
    ) -> Result<Option<RawDecl>, usize> {
        let allowed = match ctx {
            Ctx::Top => self.profile.ctype_top,
            Ctx::ClassBody => self.profile.ctype_methods,
        };
        if !allowed {
            return Ok(None);
        }

        let mut last_ident: Option<String> = None;
        let mut tilde = false;
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 256 {
                return Ok(None);
            }
            let Some((p, b)) = self.next_code(cur, end) else {
                return Ok(None);
            };
            if let Some(ident) = self.read_ident(p) {
                if CONTROL_KEYWORDS.contains(&ident.text) {
                    return Ok(None);
                }
                if ident.text == "operator" {
                    // C++ operator overloads: name runs to the open paren.
                    let mut q = ident.end;
                    while q < end && self.is_code(q) && self.bytes[q] != b'(' && !self.bytes[q].is_ascii_whitespace()
                    {
                        q += 1;
                    }
                    last_ident = Some(collapse_ws(self.src[ident.start..q].trim()));
                    cur = q;
                    continue;
                }
                let name = if tilde {
                    format!("~{}", ident.text)
                } else {
                    ident.text.to_string()
                };
                tilde = false;
                last_ident = Some(name);
                cur = ident.end;
                continue;
            }
            match b {
                b'(' => {
                    let Some(name) = last_ident else {
                        return Ok(None);
                    };
                    let after = match self.match_pair(p, end, b'(', b')') {
                        Some(a) => a,
                        None => return Ok(None),
                    };
                    return self.finish_ctype(start, name, after, end, ctx);
                }
                b'~' => {
                    tilde = true;
                    cur = p + 1;
                }
                b'*' | b'&' | b':' | b'.' | b',' | b'<' | b'>' | b'[' | b']' => {
                    cur = p + 1;
                }
                _ => return Ok(None),
            }
        }
    }

    /// After the parameter list of a candidate C-style function: accept
    /// trailing specifiers, then require a brace body.
    fn finish_ctype(
        &self,
        start: usize,
        name: String,
        mut cur: usize,
        end: usize,
        ctx: Ctx,
    ) -> Result<Option<RawDecl>, usize> {
        let kind = if ctx == Ctx::ClassBody {
            ComponentKind::Method
        } else {
            ComponentKind::Function
        };
        let mut guard = 0;
        loop {
            guard += 1;
            if guard > 256 {
                return Ok(None);
            }
            let Some((p, b)) = self.next_code(cur, end) else {
                return Ok(None);
            };
            match b {
                b'{' => {
                    let close = self.match_pair(p, end, b'{', b'}').ok_or(p)?;
                    return Ok(Some(RawDecl {
                        kind,
                        name: Some(name),
                        start,
                        end: close,
                        children: Vec::new(),
                        transparent: false,
                    }));
                }
                b';' => return Ok(None), // prototype
                b'=' => {
                    if self.bytes.get(p + 1) == Some(&b'>') {
                        // C# expression-bodied member: runs to the semicolon.
                        let mut i = p + 2;
                        let mut depth = 0i32;
                        while i < end {
                            if self.is_code(i) {
                                match self.bytes[i] {
                                    b'(' | b'[' | b'{' => depth += 1,
                                    b')' | b']' | b'}' => depth -= 1,
                                    b';' if depth == 0 => {
                                        return Ok(Some(RawDecl {
                                            kind,
                                            name: Some(name),
                                            start,
                                            end: i + 1,
                                            children: Vec::new(),
                                            transparent: false,
                                        }));
                                    }
                                    _ => {}
                                }
                            }
                            i += 1;
                        }
                        return Ok(None);
                    }
                    // `= default;` / `= delete;` definitions.
                    let next_ident = self
                        .next_code(p + 1, end)
                        .and_then(|(q, _)| self.read_ident(q));
                    match next_ident {
                        Some(id) if id.text == "default" || id.text == "delete" => {
                            if let Some((sp, b';')) = self.next_code(id.end, end) {
                                return Ok(Some(RawDecl {
                                    kind,
                                    name: Some(name),
                                    start,
                                    end: sp + 1,
                                    children: Vec::new(),
                                    transparent: false,
                                }));
                            }
                            return Ok(None);
                        }
                        _ => return Ok(None), // pure virtual and friends
                    }
                }
                b':' => {
                    // C++ constructor initializer list: consume to the body.
                    let mut i = p + 1;
                    let mut depth = 0i32;
                    while i < end {
                        if self.is_code(i) {
                            match self.bytes[i] {
                                b'(' | b'[' => depth += 1,
                                b')' | b']' => depth -= 1,
                                b'{' if depth == 0 => {
                                    let close = self.match_pair(i, end, b'{', b'}').ok_or(i)?;
                                    return Ok(Some(RawDecl {
                                        kind,
                                        name: Some(name),
                                        start,
                                        end: close,
                                        children: Vec::new(),
                                        transparent: false,
                                    }));
                                }
                                b';' if depth == 0 => return Ok(None),
                                _ => {}
                            }
                        }
                        i += 1;
                    }
                    return Ok(None);
                }
                b'-' if self.bytes.get(p + 1) == Some(&b'>') => {
                    cur = p + 2; // C++ trailing return type
                }
                b',' => {
                    cur = p + 1; // throws A, B
                }
                _ => {
                    // Trailing specifiers, throws clauses, return type names.
                    if let Some(id) = self.read_ident(p) {
                        cur = id.end;
                        continue;
                    }
                    if matches!(b, b'<' | b'>' | b'&' | b'*' | b'(' | b')' | b'[' | b']' | b'?' | b'.')
                    {
                        cur = p + 1;
                        continue;
                    }
                    return Ok(None);
                }
            }
        }
    }

    /// Keyword-led functions: find the body after the signature. Bodies are
    /// `{ ... }` blocks or (for expression-bodied languages) `= expr`.
    /// Returns Ok(None) for prototypes.
    fn find_body(&self, from: usize, end: usize, allow_eq_body: bool) -> Result<Option<usize>, usize> {
        let mut i = from;
        let mut pdepth = 0i32;
        while i < end {
            if self.is_code(i) {
                let b = self.bytes[i];
                match b {
                    b'(' | b'[' => pdepth += 1,
                    b')' | b']' => pdepth -= 1,
                    b'{' if pdepth == 0 => {
                        let close = self.match_pair(i, end, b'{', b'}').ok_or(i)?;
                        return Ok(Some(close));
                    }
                    b';' if pdepth == 0 => return Ok(None),
                    b'=' if pdepth == 0 && allow_eq_body => {
                        if self.bytes.get(i + 1) == Some(&b'>') {
                            i += 2;
                            continue;
                        }
                        return Ok(self.scan_expression_end(i + 1, end));
                    }
                    _ => {}
                }
            }
            i += 1;
        }
        Ok(None)
    }

    /// End of an `= expr` body: the terminating `;`, or the first newline at
    /// depth zero once the expression has content.
    fn scan_expression_end(&self, from: usize, end: usize) -> Option<usize> {
        let mut i = from;
        let mut depth = 0i32;
        let mut saw_content = false;
        while i < end {
            if self.is_code(i) {
                let b = self.bytes[i];
                match b {
                    b'(' | b'[' | b'{' => depth += 1,
                    b')' | b']' | b'}' => depth -= 1,
                    b';' if depth == 0 => return Some(i + 1),
                    b'\n' if depth == 0 && saw_content => return Some(i),
                    _ => {}
                }
                if !b.is_ascii_whitespace() {
                    saw_content = true;
                }
            } else {
                saw_content = true;
            }
            i += 1;
        }
        Some(end)
    }

    /// Advance past one statement-ish unit of residue.
    fn skip_statement(&self, pos: usize, end: usize) -> usize {
        let mut i = pos;
        let mut depth = 0i32;
        let mut saw_content = false;
        while i < end {
            if self.is_code(i) {
                let b = self.bytes[i];
                match b {
                    b'{' | b'(' | b'[' => depth += 1,
                    b'}' | b')' | b']' => {
                        depth -= 1;
                        if depth <= 0 && b == b'}' {
                            return i + 1;
                        }
                    }
                    b';' if depth == 0 => return i + 1,
                    b'\n' if depth == 0 && saw_content => return i + 1,
                    _ => {}
                }
                if !b.is_ascii_whitespace() {
                    saw_content = true;
                }
            } else {
                saw_content = true;
            }
            i += 1;
        }
        end
    }

    /// Match `<...>` generic groups (template parameter lists).
    fn match_angle(&self, open: usize, end: usize) -> Option<usize> {
        let mut depth = 1i32;
        let mut i = open + 1;
        while i < end {
            if self.is_code(i) {
                match self.bytes[i] {
                    b'<' => depth += 1,
                    b'>' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(i + 1);
                        }
                    }
                    b';' | b'{' => return None,
                    _ => {}
                }
            }
            i += 1;
        }
        None
    }

    /// If a string literal starts at the next code position, return the
    /// index just past it.
    fn peek_string(&self, i: usize, end: usize) -> Option<usize> {
        let j = self.skip_ws(i, end);
        if j < end && self.mask[j] == mask::STR {
            let mut k = j;
            while k < end && self.mask[k] == mask::STR {
                k += 1;
            }
            return Some(k);
        }
        None
    }
}

fn collapse_ws(s: &str) -> String {
    let mut out = String::with_capacity(s.len().min(64));
    let mut last_ws = false;
    for c in s.chars() {
        if c.is_whitespace() {
            if !last_ws && !out.is_empty() {
                out.push(' ');
            }
            last_ws = true;
        } else {
            out.push(c);
            last_ws = false;
        }
        if out.len() >= 64 {
            break;
        }
    }
    out.trim_end().to_string()
}
