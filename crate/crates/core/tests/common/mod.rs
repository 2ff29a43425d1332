//! Shared support for integration tests: an independent CVSS v3.1 reference
//! calculator (a direct transcription of the specification pseudocode, kept
//! separate from the implementation under test) and the componentizer
//! fixture harness.

#![allow(dead_code)]

use malscan_core::componentizer::{decompose, CodeComponent, SourceFile};
use malscan_core::lang::LanguageId;
use std::path::PathBuf;

/// Reference CVSS v3.1 base score, written as a lookup-table transcription
/// of the specification. Input is the canonical vector string; output is the
/// score in tenths.
pub fn reference_base_score_tenths(vector: &str) -> u32 {
    fn metric(vector: &str, key: &str) -> char {
        let token = format!("/{key}:");
        let pos = vector.find(&token).expect("metric present");
        vector[pos + token.len()..].chars().next().expect("metric value")
    }

    let scope_changed = metric(vector, "S") == 'C';
    let av = match metric(vector, "AV") {
        'N' => 0.85,
        'A' => 0.62,
        'L' => 0.55,
        'P' => 0.2,
        other => panic!("bad AV {other}"),
    };
    let ac = match metric(vector, "AC") {
        'L' => 0.77,
        'H' => 0.44,
        other => panic!("bad AC {other}"),
    };
    let pr = match (metric(vector, "PR"), scope_changed) {
        ('N', _) => 0.85,
        ('L', false) => 0.62,
        ('L', true) => 0.68,
        ('H', false) => 0.27,
        ('H', true) => 0.5,
        (other, _) => panic!("bad PR {other}"),
    };
    let ui = match metric(vector, "UI") {
        'N' => 0.85,
        'R' => 0.62,
        other => panic!("bad UI {other}"),
    };
    let impact_weight = |c: char| match c {
        'N' => 0.0,
        'L' => 0.22,
        'H' => 0.56,
        other => panic!("bad impact {other}"),
    };
    let c = impact_weight(metric(vector, "C"));
    let i = impact_weight(metric(vector, "I"));
    let a = impact_weight(metric(vector, "A"));

    let iss: f64 = 1.0 - (1.0 - c) * (1.0 - i) * (1.0 - a);
    let impact = if scope_changed {
        7.52 * (iss - 0.029) - 3.25 * (iss - 0.02).powi(15)
    } else {
        6.42 * iss
    };
    if impact <= 0.0 {
        return 0;
    }
    let exploitability: f64 = 8.22 * av * ac * pr * ui;
    let combined: f64 = if scope_changed {
        (1.08 * (impact + exploitability)).min(10.0)
    } else {
        (impact + exploitability).min(10.0)
    };
    // Roundup per the specification appendix, integer formulation.
    let int_input = (combined * 100_000.0).round() as i64;
    let rounded = if int_input % 10_000 == 0 {
        int_input as f64 / 100_000.0
    } else {
        ((int_input / 10_000) + 1) as f64 / 10.0
    };
    (rounded * 10.0).round() as u32
}

/// The fixture suite: (language, directory name, extension).
pub const FIXTURE_LANGUAGES: [(LanguageId, &str, &str); 14] = [
    (LanguageId::Python, "python", "py"),
    (LanguageId::Java, "java", "java"),
    (LanguageId::C, "c", "c"),
    (LanguageId::Cpp, "cpp", "cpp"),
    (LanguageId::Rust, "rust", "rs"),
    (LanguageId::Go, "go", "go"),
    (LanguageId::Scala, "scala", "scala"),
    (LanguageId::JavaScript, "javascript", "js"),
    (LanguageId::TypeScript, "typescript", "ts"),
    (LanguageId::Php, "php", "php"),
    (LanguageId::Ruby, "ruby", "rb"),
    (LanguageId::CSharp, "csharp", "cs"),
    (LanguageId::Kotlin, "kotlin", "kt"),
    (LanguageId::Swift, "swift", "swift"),
];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn load_fixture(lang: LanguageId, dir: &str, name: &str) -> SourceFile {
    let path = fixture_dir().join(dir).join(name);
    let content = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("fixture {} unreadable: {e}", path.display()));
    SourceFile::new(format!("{dir}/{name}"), lang, content)
}

/// Check every structural invariant the componentizer promises: span sanity,
/// slice equality, non-overlap at equal nesting, child containment, sorted
/// output, deterministic ids, and non-whitespace coverage by top-level spans.
pub fn check_component_invariants(file: &SourceFile, components: &[CodeComponent]) {
    let content = &file.content;
    let label = &file.path;

    for c in components {
        assert!(
            c.span.start < c.span.end && c.span.end <= content.len(),
            "{label}: component {} has bad span {:?}",
            c.name,
            c.span
        );
        assert_eq!(
            c.source,
            &content[c.span.start..c.span.end],
            "{label}: component {} source differs from its slice",
            c.name
        );
    }

    // Non-overlap at the same nesting level.
    let top: Vec<&CodeComponent> = components.iter().filter(|c| c.parent_id.is_none()).collect();
    for (i, a) in top.iter().enumerate() {
        for b in top.iter().skip(i + 1) {
            assert!(
                !a.span.overlaps(&b.span),
                "{label}: top-level components {} and {} overlap",
                a.name,
                b.name
            );
        }
    }

    // Child containment, plus non-overlap among siblings.
    for c in components {
        if let Some(parent_id) = &c.parent_id {
            let parent = components
                .iter()
                .find(|p| &p.id == parent_id)
                .unwrap_or_else(|| panic!("{label}: {} has dangling parent", c.name));
            assert!(
                parent.span.contains(&c.span),
                "{label}: child {} escapes parent {}",
                c.name,
                parent.name
            );
        }
    }
    let mut by_parent: std::collections::BTreeMap<&str, Vec<&CodeComponent>> = Default::default();
    for c in components {
        if let Some(p) = &c.parent_id {
            by_parent.entry(p.as_str()).or_default().push(c);
        }
    }
    for (parent, siblings) in by_parent {
        for (i, a) in siblings.iter().enumerate() {
            for b in siblings.iter().skip(i + 1) {
                assert!(
                    !a.span.overlaps(&b.span),
                    "{label}: siblings {} and {} under {parent} overlap",
                    a.name,
                    b.name
                );
            }
        }
    }

    // Sorted by span start.
    for pair in components.windows(2) {
        assert!(
            pair[0].span.start <= pair[1].span.start,
            "{label}: components not sorted by span start"
        );
    }

    // Deterministic re-scan: identical components including ids.
    let again = decompose(file).expect("decompose is deterministic");
    assert_eq!(components, &again[..], "{label}: decompose not deterministic");

    // Top-level spans cover every non-whitespace byte.
    let mut covered = vec![false; content.len()];
    for c in &top {
        for flag in &mut covered[c.span.start..c.span.end] {
            *flag = true;
        }
    }
    for (i, byte) in content.bytes().enumerate() {
        if !byte.is_ascii_whitespace() {
            assert!(
                covered[i],
                "{label}: byte {i} ({:?}) not covered by any top-level span",
                &content[i..content.len().min(i + 12)]
            );
        }
    }
}
