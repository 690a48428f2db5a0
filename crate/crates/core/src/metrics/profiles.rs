//! Language profiles: per-syntax token tables driving the complexity
//! counter, loadable from JSON and shipped with built-in defaults.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token tables for one syntax family.
///
/// `decision_tokens` are counted as decision points by the complexity
/// counter; a profile with an empty table does not support complexity and
/// triggers the word-distance fallback. `function_tokens` name function
/// entries for the same family and travel with the profile format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub language_name: String,
    pub file_extensions: Vec<String>,
    pub decision_tokens: Vec<String>,
    pub function_tokens: Vec<String>,
    #[serde(default)]
    pub line_comment: Option<String>,
    #[serde(default)]
    pub block_comment_start: Option<String>,
    #[serde(default)]
    pub block_comment_end: Option<String>,
    pub string_delimiters: Vec<char>,
}

impl LanguageProfile {
    /// A profile can count complexity only when it declares decision tokens.
    pub fn supports_complexity(&self) -> bool {
        !self.decision_tokens.is_empty()
    }
}

/// Extension-indexed set of profiles.
#[derive(Debug, Clone)]
pub struct ProfileRegistry {
    profiles: Vec<LanguageProfile>,
    by_extension: HashMap<String, usize>,
}

impl ProfileRegistry {
    /// Build a registry, enforcing that extensions are unique across
    /// profiles and that every profile names at least one extension.
    pub fn new(profiles: Vec<LanguageProfile>) -> Result<Self> {
        let mut by_extension = HashMap::new();
        for (idx, profile) in profiles.iter().enumerate() {
            if profile.language_name.trim().is_empty() {
                return Err(Error::Input("profile with empty language_name".to_string()));
            }
            for ext in &profile.file_extensions {
                let key = ext.trim_start_matches('.').to_lowercase();
                if key.is_empty() {
                    return Err(Error::Input(format!(
                        "profile {} lists an empty extension",
                        profile.language_name
                    )));
                }
                if let Some(prev) = by_extension.insert(key.clone(), idx) {
                    return Err(Error::Input(format!(
                        "extension \"{key}\" claimed by both {} and {}",
                        profiles[prev].language_name, profile.language_name
                    )));
                }
            }
        }
        Ok(Self {
            profiles,
            by_extension,
        })
    }

    /// Registry with the built-in profile tables.
    pub fn builtin() -> Self {
        Self::new(builtin_profiles()).expect("built-in profiles are well-formed")
    }

    /// Parse the documented JSON format: an array of profile objects.
    pub fn from_json(text: &str) -> Result<Self> {
        let profiles: Vec<LanguageProfile> = serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("malformed profile file: {e}")))?;
        Self::new(profiles)
    }

    /// Serialize all profiles to the same JSON format `from_json` accepts.
    pub fn to_json(&self) -> String {
        let mut out =
            serde_json::to_string_pretty(&self.profiles).expect("profiles serialize cleanly");
        out.push('\n');
        out
    }

    /// Look up the profile for a file path by its extension (lowercased).
    pub fn profile_for_path(&self, path: &str) -> Option<&LanguageProfile> {
        let file_name = path.rsplit('/').next().unwrap_or(path);
        let ext = file_name.rsplit_once('.')?.1.to_lowercase();
        self.by_extension.get(&ext).map(|&i| &self.profiles[i])
    }

    pub fn profiles(&self) -> &[LanguageProfile] {
        &self.profiles
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// The built-in tables: curly-brace languages, indentation-scripting
/// syntax, and POSIX shell.
pub fn builtin_profiles() -> Vec<LanguageProfile> {
    vec![
        LanguageProfile {
            language_name: "c-like".to_string(),
            file_extensions: strings(&[
                "c", "h", "cpp", "hpp", "cc", "hh", "cxx", "hxx", "java", "js", "jsx", "ts",
                "tsx", "cs", "go", "rs", "kt", "kts", "swift", "scala", "php", "dart",
            ]),
            decision_tokens: strings(&["if", "for", "while", "case", "catch", "&&", "||", "?"]),
            function_tokens: strings(&["fn", "func", "function"]),
            line_comment: Some("//".to_string()),
            block_comment_start: Some("/*".to_string()),
            block_comment_end: Some("*/".to_string()),
            string_delimiters: vec!['"', '\''],
        },
        LanguageProfile {
            language_name: "scripting".to_string(),
            file_extensions: strings(&["py", "pyi"]),
            decision_tokens: strings(&["if", "elif", "for", "while", "except", "and", "or"]),
            function_tokens: strings(&["def", "lambda"]),
            line_comment: Some("#".to_string()),
            block_comment_start: None,
            block_comment_end: None,
            string_delimiters: vec!['"', '\''],
        },
        LanguageProfile {
            language_name: "shell".to_string(),
            file_extensions: strings(&["sh", "bash", "zsh", "ksh"]),
            decision_tokens: strings(&["if", "elif", "case", "for", "while", "until", "&&", "||"]),
            function_tokens: strings(&["function"]),
            line_comment: Some("#".to_string()),
            block_comment_start: None,
            block_comment_end: None,
            string_delimiters: vec!['"', '\''],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_registry_resolves_extensions() {
        let reg = ProfileRegistry::builtin();
        assert_eq!(reg.profile_for_path("src/main.rs").unwrap().language_name, "c-like");
        assert_eq!(reg.profile_for_path("tool.py").unwrap().language_name, "scripting");
        assert_eq!(reg.profile_for_path("run.SH").unwrap().language_name, "shell");
        assert!(reg.profile_for_path("index.html").is_none());
        assert!(reg.profile_for_path("Makefile").is_none());
    }

    #[test]
    fn duplicate_extension_rejected() {
        let mut profiles = builtin_profiles();
        profiles[1].file_extensions.push("rs".to_string());
        assert!(ProfileRegistry::new(profiles).is_err());
    }

    #[test]
    fn json_round_trip() {
        let reg = ProfileRegistry::builtin();
        let parsed = ProfileRegistry::from_json(&reg.to_json()).unwrap();
        assert_eq!(parsed.profiles(), reg.profiles());
    }

    #[test]
    fn all_builtin_profiles_support_complexity() {
        for p in builtin_profiles() {
            assert!(p.supports_complexity(), "{}", p.language_name);
        }
    }
}
