//! Decomposition robustness: arbitrary input text, in every registered
//! language, must never panic — it either fails cleanly (ParseFailure) or
//! yields components satisfying the structural invariants.

mod common;

use common::FIXTURE_LANGUAGES;
use malscan_core::componentizer::{decompose, SourceFile};
use proptest::prelude::*;

/// Strategy biased toward code-looking text: keywords, braces, quotes,
/// comments, and unicode mixed freely.
fn code_soup() -> impl Strategy<Value = String> {
    let token = prop_oneof![
        Just("fn ".to_string()),
        Just("def ".to_string()),
        Just("class ".to_string()),
        Just("func ".to_string()),
        Just("end\n".to_string()),
        Just("{".to_string()),
        Just("}".to_string()),
        Just("(".to_string()),
        Just(")".to_string()),
        Just("\"".to_string()),
        Just("'".to_string()),
        Just("`".to_string()),
        Just("//".to_string()),
        Just("/*".to_string()),
        Just("*/".to_string()),
        Just("#".to_string()),
        Just("\n".to_string()),
        Just(";".to_string()),
        Just("=".to_string()),
        Just("->".to_string()),
        Just("=>".to_string()),
        Just("名前".to_string()),
        Just("émoji 🦀".to_string()),
        Just("ident".to_string()),
        Just("    ".to_string()),
        "[a-zA-Z0-9_]{1,8}",
    ];
    proptest::collection::vec(token, 0..60).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn decompose_never_panics_and_keeps_invariants(content in code_soup()) {
        for (lang, dir, _) in FIXTURE_LANGUAGES {
            let file = SourceFile::new(format!("soup.{dir}"), lang, content.clone());
            match decompose(&file) {
                Err(_) => {} // clean failure; the orchestrator degrades to fallback
                Ok(components) => {
                    for c in &components {
                        prop_assert!(c.span.start < c.span.end);
                        prop_assert!(c.span.end <= content.len());
                        prop_assert_eq!(&c.source, &content[c.span.start..c.span.end]);
                    }
                    let top: Vec<_> = components.iter().filter(|c| c.parent_id.is_none()).collect();
                    for (i, a) in top.iter().enumerate() {
                        for b in top.iter().skip(i + 1) {
                            prop_assert!(!a.span.overlaps(&b.span),
                                "overlap in {dir}: {:?} vs {:?}", a.span, b.span);
                        }
                    }
                    for pair in components.windows(2) {
                        prop_assert!(pair[0].span.start <= pair[1].span.start);
                    }
                }
            }
        }
    }
}
