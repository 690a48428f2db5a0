//! Decision-point complexity counting over source text.
//!
//! The count is 1 + occurrences of a profile's decision tokens, skipping
//! occurrences inside comments and string literals. Word-like tokens only
//! match at word boundaries (`if` never matches inside `verify`); operator
//! tokens such as `&&` match literally.

use crate::error::{Error, Result};
use crate::metrics::profiles::LanguageProfile;

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// A token is word-like when it starts with a word character; those need
/// boundary checks, operators do not.
fn is_word_token(token: &str) -> bool {
    token.chars().next().is_some_and(is_word_char)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScanState {
    Code,
    LineComment,
    BlockComment,
    Str(char),
}

fn starts_with_at(chars: &[char], at: usize, needle: &[char]) -> bool {
    chars.len() >= at + needle.len() && chars[at..at + needle.len()] == *needle
}

/// Count decision-token occurrences in code regions of `source`.
fn count_decisions(source: &str, profile: &LanguageProfile) -> usize {
    let chars: Vec<char> = source.chars().collect();
    let line_comment: Option<Vec<char>> =
        profile.line_comment.as_ref().map(|m| m.chars().collect());
    let block_start: Option<Vec<char>> = profile
        .block_comment_start
        .as_ref()
        .map(|m| m.chars().collect());
    let block_end: Option<Vec<char>> = profile
        .block_comment_end
        .as_ref()
        .map(|m| m.chars().collect());

    // Longest-first so e.g. a two-char operator is never split in two.
    let mut tokens: Vec<(Vec<char>, bool)> = profile
        .decision_tokens
        .iter()
        .map(|t| (t.chars().collect(), is_word_token(t)))
        .collect();
    tokens.sort_by_key(|t| std::cmp::Reverse(t.0.len()));

    let mut count = 0usize;
    let mut state = ScanState::Code;
    let mut i = 0usize;
    while i < chars.len() {
        match state {
            ScanState::Code => {
                if let Some(m) = &line_comment {
                    if starts_with_at(&chars, i, m) {
                        state = ScanState::LineComment;
                        i += m.len();
                        continue;
                    }
                }
                if let Some(m) = &block_start {
                    if starts_with_at(&chars, i, m) {
                        state = ScanState::BlockComment;
                        i += m.len();
                        continue;
                    }
                }
                if profile.string_delimiters.contains(&chars[i]) {
                    state = ScanState::Str(chars[i]);
                    i += 1;
                    continue;
                }
                let mut matched = false;
                for (token, word_like) in &tokens {
                    if !starts_with_at(&chars, i, token) {
                        continue;
                    }
                    if *word_like {
                        let before_ok = i == 0 || !is_word_char(chars[i - 1]);
                        let end = i + token.len();
                        let after_ok = end == chars.len() || !is_word_char(chars[end]);
                        if !(before_ok && after_ok) {
                            continue;
                        }
                    }
                    count += 1;
                    i += token.len();
                    matched = true;
                    break;
                }
                if !matched {
                    // Skip the whole word so a later token can't match its tail.
                    if is_word_char(chars[i]) {
                        while i < chars.len() && is_word_char(chars[i]) {
                            i += 1;
                        }
                    } else {
                        i += 1;
                    }
                }
            }
            ScanState::LineComment => {
                if chars[i] == '\n' {
                    state = ScanState::Code;
                }
                i += 1;
            }
            ScanState::BlockComment => {
                if let Some(m) = &block_end {
                    if starts_with_at(&chars, i, m) {
                        state = ScanState::Code;
                        i += m.len();
                        continue;
                    }
                }
                i += 1;
            }
            ScanState::Str(delim) => {
                if chars[i] == '\\' {
                    i += 2;
                } else {
                    if chars[i] == delim {
                        state = ScanState::Code;
                    }
                    i += 1;
                }
            }
        }
    }
    count
}

/// 1 + decision points in `source` under `profile`.
///
/// Errors with `ComplexityUnavailable` when the profile declares no
/// decision tokens; `measure_commit` turns that into the word-distance
/// fallback.
pub fn cyclomatic_complexity(source: &str, profile: &LanguageProfile) -> Result<usize> {
    if !profile.supports_complexity() {
        return Err(Error::ComplexityUnavailable(format!(
            "profile {} declares no decision tokens",
            profile.language_name
        )));
    }
    Ok(1 + count_decisions(source, profile))
}

/// |CC(after) - CC(before)| with CC(absent) = 0.
///
/// Absolute value: adding and removing logic both represent effort, and a
/// signed delta would allow negative contribution sizes.
pub fn cc_delta(
    before: Option<&str>,
    after: Option<&str>,
    profile: &LanguageProfile,
) -> Result<usize> {
    let cc_before = before.map_or(Ok(0), |s| cyclomatic_complexity(s, profile))?;
    let cc_after = after.map_or(Ok(0), |s| cyclomatic_complexity(s, profile))?;
    Ok(cc_before.abs_diff(cc_after))
}
