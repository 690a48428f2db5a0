//! Contribution-size measurement: how much a commit changed, under one of
//! three metrics, with a word-distance fallback for files whose syntax has
//! no decision structure to count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CommitRecord, FileChange};

mod complexity;
mod distance;
mod profiles;

pub use complexity::{cc_delta, cyclomatic_complexity};
pub use distance::{levenshtein_words, line_diff_delta, tokenize_words};
pub use profiles::{builtin_profiles, LanguageProfile, ProfileRegistry};

/// Which contribution-size metric to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Lines added, removed or changed (a changed line counts twice).
    LocDelta,
    /// Token-level edit distance between before and after text.
    LevenshteinWords,
    /// Absolute change in decision-point complexity.
    CyclomaticDelta,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::LocDelta => "loc_delta",
            MetricKind::LevenshteinWords => "levenshtein_words",
            MetricKind::CyclomaticDelta => "cyclomatic_delta",
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Files longer than this (in characters, either side) are measured by
/// line diff to bound the quadratic edit-distance cost.
pub const DEFAULT_LARGE_FILE_CHARS: usize = 1_000_000;

/// Contribution size of one file within a commit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileMeasure {
    pub path: String,
    pub file_delta: f64,
    pub effective_metric: MetricKind,
}

/// Contribution size of one commit: the total over its files, with
/// per-file provenance for any fallback that was applied.
///
/// `fallback_applied` records the syntax fallback specifically: a
/// complexity request that was satisfied by word distance for at least one
/// file. The commit-level `effective_metric` is the shared per-file metric
/// when all files agree, otherwise the requested one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionMeasure {
    pub commit_id: String,
    pub requested_metric: MetricKind,
    pub effective_metric: MetricKind,
    pub delta_l: f64,
    pub per_file: Vec<FileMeasure>,
    pub fallback_applied: bool,
}

fn words_delta(before: Option<&str>, after: Option<&str>) -> f64 {
    let before = tokenize_words(before.unwrap_or(""));
    let after = tokenize_words(after.unwrap_or(""));
    levenshtein_words(&before, &after) as f64
}

fn lines_delta(before: Option<&str>, after: Option<&str>) -> f64 {
    line_diff_delta(before.unwrap_or(""), after.unwrap_or("")) as f64
}

fn measure_file(
    file: &FileChange,
    requested: MetricKind,
    registry: &ProfileRegistry,
    large_file_chars: usize,
) -> Result<(FileMeasure, bool)> {
    if file.is_binary {
        return Ok((
            FileMeasure {
                path: file.path.clone(),
                file_delta: 0.0,
                effective_metric: requested,
            },
            false,
        ));
    }

    let before = file.before_content.as_deref();
    let after = file.after_content.as_deref();
    let too_large = before.map_or(0, str::len).max(after.map_or(0, str::len)) > large_file_chars;
    if too_large {
        return Ok((
            FileMeasure {
                path: file.path.clone(),
                file_delta: lines_delta(before, after),
                effective_metric: MetricKind::LocDelta,
            },
            false,
        ));
    }

    let (delta, effective, syntax_fallback) = match requested {
        MetricKind::LocDelta => (lines_delta(before, after), MetricKind::LocDelta, false),
        MetricKind::LevenshteinWords => {
            (words_delta(before, after), MetricKind::LevenshteinWords, false)
        }
        MetricKind::CyclomaticDelta => {
            let capable = registry
                .profile_for_path(&file.path)
                .filter(|p| p.supports_complexity());
            match capable {
                Some(profile) => (
                    cc_delta(before, after, profile)? as f64,
                    MetricKind::CyclomaticDelta,
                    false,
                ),
                None => (words_delta(before, after), MetricKind::LevenshteinWords, true),
            }
        }
    };
    Ok((
        FileMeasure {
            path: file.path.clone(),
            file_delta: delta,
            effective_metric: effective,
        },
        syntax_fallback,
    ))
}

/// Measure a non-merge commit under the requested metric.
///
/// Complexity requests fall back to word distance for files whose
/// extension has no complexity-capable profile; oversized files are
/// measured by line diff regardless of the request. Binary files
/// contribute zero.
pub fn measure_commit(
    record: &CommitRecord,
    requested: MetricKind,
    registry: &ProfileRegistry,
) -> Result<ContributionMeasure> {
    measure_commit_with_limit(record, requested, registry, DEFAULT_LARGE_FILE_CHARS)
}

/// [`measure_commit`] with an explicit large-file threshold in characters.
pub fn measure_commit_with_limit(
    record: &CommitRecord,
    requested: MetricKind,
    registry: &ProfileRegistry,
    large_file_chars: usize,
) -> Result<ContributionMeasure> {
    if record.is_merge {
        return Err(Error::ContractViolation(format!(
            "measure_commit called on merge commit {}",
            record.commit_id
        )));
    }

    let mut per_file = Vec::with_capacity(record.files.len());
    let mut fallback_applied = false;
    for file in &record.files {
        let (measure, syntax_fallback) =
            measure_file(file, requested, registry, large_file_chars)?;
        fallback_applied |= syntax_fallback;
        per_file.push(measure);
    }

    let delta_l: f64 = per_file.iter().map(|f| f.file_delta).sum();
    let effective_metric = match per_file.first() {
        Some(first) if per_file.iter().all(|f| f.effective_metric == first.effective_metric) => {
            first.effective_metric
        }
        _ => requested,
    };
    Ok(ContributionMeasure {
        commit_id: record.commit_id.clone(),
        requested_metric: requested,
        effective_metric,
        delta_l,
        per_file,
        fallback_applied,
    })
}
