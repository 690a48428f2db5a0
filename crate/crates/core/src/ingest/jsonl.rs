//! Portable JSONL commit format: one JSON object per line.
//!
//! Schema per line:
//! `{"id", "author_name", "author_email", "timestamp", "is_merge", "files"}`
//! where each file is `{"path", "before", "after", "is_binary"}`. Unknown
//! keys are ignored; `before`/`after` default to null and `is_binary` to
//! false when absent.

use std::collections::HashSet;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::ingest::{CommitRecord, FileChange};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<'a>(obj: &'a Value, name: &str, line: usize) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| parse_err(line, format!("missing field `{name}`")))
}

fn string_field(obj: &Value, name: &str, line: usize) -> Result<String> {
    field(obj, name, line)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| parse_err(line, format!("{name} not a string")))
}

fn bool_field(obj: &Value, name: &str, line: usize) -> Result<bool> {
    field(obj, name, line)?
        .as_bool()
        .ok_or_else(|| parse_err(line, format!("{name} not a boolean")))
}

fn optional_text(obj: &Value, name: &str, line: usize) -> Result<Option<String>> {
    match obj.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(parse_err(line, format!("{name} not a string or null"))),
    }
}

fn parse_file(value: &Value, line: usize) -> Result<FileChange> {
    if !value.is_object() {
        return Err(parse_err(line, "files entry not an object"));
    }
    let path = string_field(value, "path", line)?;
    if path.is_empty() {
        return Err(parse_err(line, "path empty"));
    }
    let is_binary = match value.get("is_binary") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| parse_err(line, "is_binary not a boolean"))?,
    };
    let before_content = optional_text(value, "before", line)?;
    let after_content = optional_text(value, "after", line)?;
    if is_binary {
        // Binary changes never carry content.
        return Ok(FileChange {
            path,
            before_content: None,
            after_content: None,
            is_binary: true,
        });
    }
    if before_content.is_none() && after_content.is_none() {
        return Err(parse_err(
            line,
            format!("file \"{path}\" has neither before nor after content"),
        ));
    }
    Ok(FileChange {
        path,
        before_content,
        after_content,
        is_binary: false,
    })
}

/// Parse a JSONL stream into commit records, in input order.
///
/// Empty lines are skipped. Errors name the offending 1-based line.
pub fn parse_jsonl(text: &str) -> Result<Vec<CommitRecord>> {
    let mut records = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(raw)
            .map_err(|e| parse_err(line, format!("malformed JSON ({e})")))?;
        if !value.is_object() {
            return Err(parse_err(line, "not a JSON object"));
        }

        let commit_id = string_field(&value, "id", line)?;
        if commit_id.is_empty() {
            return Err(parse_err(line, "id empty"));
        }
        if !seen_ids.insert(commit_id.clone()) {
            return Err(parse_err(line, format!("duplicate commit id \"{commit_id}\"")));
        }

        let timestamp_value = field(&value, "timestamp", line)?;
        let timestamp = match timestamp_value.as_i64() {
            Some(t) if t >= 0 => t as u64,
            Some(_) => return Err(parse_err(line, "timestamp negative")),
            None => return Err(parse_err(line, "timestamp not an integer")),
        };

        let files_value = field(&value, "files", line)?;
        let files = files_value
            .as_array()
            .ok_or_else(|| parse_err(line, "files not an array"))?
            .iter()
            .map(|f| parse_file(f, line))
            .collect::<Result<Vec<_>>>()?;

        records.push(CommitRecord {
            commit_id,
            author_name: string_field(&value, "author_name", line)?,
            author_email: string_field(&value, "author_email", line)?,
            author_id: String::new(),
            timestamp,
            is_merge: bool_field(&value, "is_merge", line)?,
            files,
        });
    }
    Ok(records)
}

/// Render records back to the JSONL schema, one object per line, LF-ended.
///
/// Inverse of [`parse_jsonl`] for valid record lists. `author_id` is not
/// part of the wire format; it is re-derived by `resolve_authors`.
pub fn render_jsonl(records: &[CommitRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        let files: Vec<Value> = rec
            .files
            .iter()
            .map(|f| {
                serde_json::json!({
                    "path": f.path,
                    "before": f.before_content,
                    "after": f.after_content,
                    "is_binary": f.is_binary,
                })
            })
            .collect();
        let obj = serde_json::json!({
            "id": rec.commit_id,
            "author_name": rec.author_name,
            "author_email": rec.author_email,
            "timestamp": rec.timestamp,
            "is_merge": rec.is_merge,
            "files": files,
        });
        out.push_str(&obj.to_string());
        out.push('\n');
    }
    out
}
