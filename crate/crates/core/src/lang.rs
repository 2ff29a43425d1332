//! Supported-language registry and extension-based detection.
//!
//! The registry holds exactly 14 named languages plus a distinguished
//! `Unknown` member. Files in unregistered languages still flow through the
//! pipeline via fallback fragmentation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageId {
    Python,
    Java,
    C,
    Cpp,
    Rust,
    Go,
    Scala,
    JavaScript,
    TypeScript,
    Php,
    Ruby,
    CSharp,
    Kotlin,
    Swift,
    Unknown,
}

impl LanguageId {
    /// The 14 registered languages, in registry order. `Unknown` is not part
    /// of the registry.
    pub const REGISTRY: [LanguageId; 14] = [
        LanguageId::Python,
        LanguageId::Java,
        LanguageId::C,
        LanguageId::Cpp,
        LanguageId::Rust,
        LanguageId::Go,
        LanguageId::Scala,
        LanguageId::JavaScript,
        LanguageId::TypeScript,
        LanguageId::Php,
        LanguageId::Ruby,
        LanguageId::CSharp,
        LanguageId::Kotlin,
        LanguageId::Swift,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LanguageId::Python => "python",
            LanguageId::Java => "java",
            LanguageId::C => "c",
            LanguageId::Cpp => "cpp",
            LanguageId::Rust => "rust",
            LanguageId::Go => "go",
            LanguageId::Scala => "scala",
            LanguageId::JavaScript => "javascript",
            LanguageId::TypeScript => "typescript",
            LanguageId::Php => "php",
            LanguageId::Ruby => "ruby",
            LanguageId::CSharp => "csharp",
            LanguageId::Kotlin => "kotlin",
            LanguageId::Swift => "swift",
            LanguageId::Unknown => "unknown",
        }
    }

    /// Parse a serialized language name. Accepts the stable lowercase names
    /// used in rule files and reports.
    pub fn parse(name: &str) -> Option<LanguageId> {
        let id = match name {
            "python" => LanguageId::Python,
            "java" => LanguageId::Java,
            "c" => LanguageId::C,
            "cpp" | "c++" => LanguageId::Cpp,
            "rust" => LanguageId::Rust,
            "go" => LanguageId::Go,
            "scala" => LanguageId::Scala,
            "javascript" | "js" => LanguageId::JavaScript,
            "typescript" | "ts" => LanguageId::TypeScript,
            "php" => LanguageId::Php,
            "ruby" => LanguageId::Ruby,
            "csharp" | "c#" => LanguageId::CSharp,
            "kotlin" => LanguageId::Kotlin,
            "swift" => LanguageId::Swift,
            "unknown" => LanguageId::Unknown,
            _ => return None,
        };
        Some(id)
    }

    pub fn from_extension(ext: &str) -> Option<LanguageId> {
        let id = match ext.to_ascii_lowercase().as_str() {
            "py" | "pyw" => LanguageId::Python,
            "java" => LanguageId::Java,
            "c" | "h" => LanguageId::C,
            "cpp" | "cc" | "cxx" | "hpp" | "hh" | "hxx" => LanguageId::Cpp,
            "rs" => LanguageId::Rust,
            "go" => LanguageId::Go,
            "scala" | "sc" => LanguageId::Scala,
            "js" | "mjs" | "cjs" | "jsx" => LanguageId::JavaScript,
            "ts" | "tsx" | "mts" | "cts" => LanguageId::TypeScript,
            "php" => LanguageId::Php,
            "rb" => LanguageId::Ruby,
            "cs" => LanguageId::CSharp,
            "kt" | "kts" => LanguageId::Kotlin,
            "swift" => LanguageId::Swift,
            _ => return None,
        };
        Some(id)
    }

    pub fn is_registered(&self) -> bool {
        !matches!(self, LanguageId::Unknown)
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Resolve the language for a path. An explicit override always wins;
/// otherwise the extension table decides; unmapped extensions fall back to
/// `Unknown` rather than erroring.
pub fn detect_language(path: &str, override_lang: Option<LanguageId>) -> LanguageId {
    if let Some(lang) = override_lang {
        return lang;
    }
    Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .and_then(LanguageId::from_extension)
        .unwrap_or(LanguageId::Unknown)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_fourteen_members() {
        assert_eq!(LanguageId::REGISTRY.len(), 14);
        assert!(LanguageId::REGISTRY.iter().all(|l| l.is_registered()));
    }

    #[test]
    fn extension_lookup() {
        assert_eq!(detect_language("a.py", None), LanguageId::Python);
        assert_eq!(detect_language("a.xyz", None), LanguageId::Unknown);
        assert_eq!(detect_language("noext", None), LanguageId::Unknown);
    }

    #[test]
    fn override_wins() {
        assert_eq!(
            detect_language("a.xyz", Some(LanguageId::Go)),
            LanguageId::Go
        );
        assert_eq!(
            detect_language("a.py", Some(LanguageId::Ruby)),
            LanguageId::Ruby
        );
    }

    #[test]
    fn names_round_trip() {
        for lang in LanguageId::REGISTRY {
            assert_eq!(LanguageId::parse(lang.as_str()), Some(lang));
        }
        assert_eq!(LanguageId::parse("unknown"), Some(LanguageId::Unknown));
        assert_eq!(LanguageId::parse("cobol"), None);
    }
}
