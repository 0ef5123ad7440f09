use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unsupported language: {0}")]
pub struct UnsupportedLanguage(pub String);

/// One of the three source languages the toolkit understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LanguageId {
    Cpp,
    Java,
    Python,
}

impl LanguageId {
    pub const ALL: [LanguageId; 3] = [LanguageId::Cpp, LanguageId::Java, LanguageId::Python];

    /// Short lowercase name, also used as the code-fence tag (`cpp`, `java`, `python`).
    pub fn name(self) -> &'static str {
        match self {
            LanguageId::Cpp => "cpp",
            LanguageId::Java => "java",
            LanguageId::Python => "python",
        }
    }

    /// Human-facing name used in report rows ("From C++", "To Python", ...).
    pub fn display_name(self) -> &'static str {
        match self {
            LanguageId::Cpp => "C++",
            LanguageId::Java => "Java",
            LanguageId::Python => "Python",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            LanguageId::Cpp => "cpp",
            LanguageId::Java => "java",
            LanguageId::Python => "py",
        }
    }

    pub fn from_extension(ext: &str) -> Result<Self, UnsupportedLanguage> {
        match ext.to_ascii_lowercase().as_str() {
            "cpp" | "cc" | "cxx" | "hpp" | "h" => Ok(LanguageId::Cpp),
            "java" => Ok(LanguageId::Java),
            "py" => Ok(LanguageId::Python),
            other => Err(UnsupportedLanguage(other.to_string())),
        }
    }

    /// Marker line a benchmark template uses for the spliced function.
    pub fn fill_marker(self) -> &'static str {
        match self {
            LanguageId::Python => "#TOFILL",
            LanguageId::Cpp | LanguageId::Java => "//TOFILL",
        }
    }

    pub(crate) fn grammar(self) -> tree_sitter::Language {
        match self {
            LanguageId::Cpp => tree_sitter_cpp::LANGUAGE.into(),
            LanguageId::Java => tree_sitter_java::LANGUAGE.into(),
            LanguageId::Python => tree_sitter_python::LANGUAGE.into(),
        }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LanguageId {
    type Err = UnsupportedLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cpp" | "c++" | "cxx" => Ok(LanguageId::Cpp),
            "java" => Ok(LanguageId::Java),
            "python" | "py" | "python3" => Ok(LanguageId::Python),
            other => Err(UnsupportedLanguage(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_aliases() {
        assert_eq!("C++".parse::<LanguageId>().unwrap(), LanguageId::Cpp);
        assert_eq!("py".parse::<LanguageId>().unwrap(), LanguageId::Python);
        assert!("rust".parse::<LanguageId>().is_err());
    }

    #[test]
    fn extension_round_trip() {
        for lang in LanguageId::ALL {
            assert_eq!(LanguageId::from_extension(lang.extension()).unwrap(), lang);
        }
    }
}
