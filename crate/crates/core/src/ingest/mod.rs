//! Commit ingestion: normalized commit records from git or JSONL, plus
//! author identity resolution and deterministic ordering.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod git;
mod jsonl;

pub use git::collect_from_git;
pub use jsonl::{parse_jsonl, render_jsonl};

/// One changed file within a commit, carrying full before/after text.
///
/// `before_content` absent means the file was created; `after_content`
/// absent means it was deleted. Binary changes carry no content at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub before_content: Option<String>,
    pub after_content: Option<String>,
    pub is_binary: bool,
}

/// One authored commit with identity, timestamp and per-file content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub commit_id: String,
    pub author_name: String,
    pub author_email: String,
    /// Canonical developer id; empty until [`resolve_authors`] runs.
    pub author_id: String,
    /// Author timestamp, seconds since the Unix epoch (UTC).
    pub timestamp: u64,
    pub is_merge: bool,
    pub files: Vec<FileChange>,
}

/// User-supplied mapping that collapses author spellings into canonical ids.
///
/// Lookup order mirrors [`resolve_authors`]: an exact `(name, email)` entry
/// wins over an email-only entry, which wins over the built-in default.
#[derive(Debug, Clone, Default)]
pub struct IdentityMap {
    by_name_email: HashMap<(String, String), String>,
    by_email: HashMap<String, String>,
}

impl IdentityMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_name_email(&mut self, name: &str, email: &str, id: &str) -> Result<()> {
        Self::check_id(id)?;
        let key = (name.to_string(), email.to_string());
        if let Some(prev) = self.by_name_email.get(&key) {
            if prev != id {
                return Err(Error::Input(format!(
                    "identity map has conflicting ids for ({name}, {email}): {prev} vs {id}"
                )));
            }
        }
        self.by_name_email.insert(key, id.to_string());
        Ok(())
    }

    pub fn insert_email(&mut self, email: &str, id: &str) -> Result<()> {
        Self::check_id(id)?;
        if let Some(prev) = self.by_email.get(email) {
            if prev != id {
                return Err(Error::Input(format!(
                    "identity map has conflicting ids for {email}: {prev} vs {id}"
                )));
            }
        }
        self.by_email.insert(email.to_string(), id.to_string());
        Ok(())
    }

    fn check_id(id: &str) -> Result<()> {
        if id.trim().is_empty() {
            return Err(Error::Input("identity map id is empty".to_string()));
        }
        Ok(())
    }

    /// Parse the documented JSON format: an array of entries, each with an
    /// optional `name`, a required `email`, and a required `id`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Entry {
            name: Option<String>,
            email: String,
            id: String,
        }
        let entries: Vec<Entry> = serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("malformed identity map: {e}")))?;
        let mut map = IdentityMap::new();
        for e in &entries {
            match &e.name {
                Some(name) => map.insert_name_email(name, &e.email, &e.id)?,
                None => map.insert_email(&e.email, &e.id)?,
            }
        }
        Ok(map)
    }

    fn lookup(&self, name: &str, email: &str) -> Option<&str> {
        self.by_name_email
            .get(&(name.to_string(), email.to_string()))
            .or_else(|| self.by_email.get(email))
            .map(String::as_str)
    }
}

/// Default identity when no map entry applies: the lowercased,
/// whitespace-trimmed email; falls back to the name, then to "unknown",
/// so the result is never empty.
fn default_identity(name: &str, email: &str) -> String {
    let email = email.trim().to_lowercase();
    if !email.is_empty() {
        return email;
    }
    let name = name.trim().to_lowercase();
    if !name.is_empty() {
        return name;
    }
    "unknown".to_string()
}

/// Set `author_id` on every record via the identity map, preserving order.
pub fn resolve_authors(mut records: Vec<CommitRecord>, map: &IdentityMap) -> Vec<CommitRecord> {
    for rec in &mut records {
        rec.author_id = match map.lookup(&rec.author_name, &rec.author_email) {
            Some(id) => id.to_string(),
            None => default_identity(&rec.author_name, &rec.author_email),
        };
    }
    records
}

/// Stable sort by (timestamp ascending, commit_id ascending).
pub fn order_commits(mut records: Vec<CommitRecord>) -> Vec<CommitRecord> {
    records.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then_with(|| a.commit_id.cmp(&b.commit_id))
    });
    records
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(id: &str, ts: u64) -> CommitRecord {
        CommitRecord {
            commit_id: id.to_string(),
            author_name: "A".to_string(),
            author_email: "a@x".to_string(),
            author_id: String::new(),
            timestamp: ts,
            is_merge: false,
            files: Vec::new(),
        }
    }

    #[test]
    fn default_identity_lowercases_and_trims_email() {
        let mut r1 = record("c1", 1);
        r1.author_email = "A@X.com".to_string();
        let mut r2 = record("c2", 2);
        r2.author_email = " a@x.com ".to_string();
        let out = resolve_authors(vec![r1, r2], &IdentityMap::new());
        assert_eq!(out[0].author_id, "a@x.com");
        assert_eq!(out[1].author_id, "a@x.com");
    }

    #[test]
    fn email_entries_collapse_aliases() {
        let mut map = IdentityMap::new();
        map.insert_email("b@y", "dev-b").unwrap();
        map.insert_email("b@corp", "dev-b").unwrap();
        let mut r1 = record("c1", 1);
        r1.author_email = "b@y".to_string();
        let mut r2 = record("c2", 2);
        r2.author_email = "b@corp".to_string();
        let out = resolve_authors(vec![r1, r2], &map);
        assert_eq!(out[0].author_id, "dev-b");
        assert_eq!(out[1].author_id, "dev-b");
    }

    #[test]
    fn name_email_entry_beats_email_entry() {
        let mut map = IdentityMap::new();
        map.insert_name_email("A", "a@x", "exact").unwrap();
        map.insert_email("a@x", "loose").unwrap();
        let out = resolve_authors(vec![record("c1", 1)], &map);
        assert_eq!(out[0].author_id, "exact");
    }

    #[test]
    fn resolution_never_yields_empty_id() {
        let mut r = record("c1", 1);
        r.author_name = "  ".to_string();
        r.author_email = String::new();
        let out = resolve_authors(vec![r], &IdentityMap::new());
        assert_eq!(out[0].author_id, "unknown");
    }

    #[test]
    fn identity_map_rejects_conflicting_ids() {
        let mut map = IdentityMap::new();
        map.insert_email("a@x", "one").unwrap();
        assert!(map.insert_email("a@x", "two").is_err());
    }

    #[test]
    fn identity_map_json_round() {
        let map = IdentityMap::from_json(
            r#"[{"email":"b@y","id":"dev-b"},{"name":"A","email":"a@x","id":"dev-a"}]"#,
        )
        .unwrap();
        assert_eq!(map.lookup("A", "a@x"), Some("dev-a"));
        assert_eq!(map.lookup("whoever", "b@y"), Some("dev-b"));
    }

    #[test]
    fn order_commits_sorts_by_timestamp_then_id() {
        let out = order_commits(vec![record("b", 5), record("a", 5), record("z", 1)]);
        let ids: Vec<&str> = out.iter().map(|r| r.commit_id.as_str()).collect();
        assert_eq!(ids, ["z", "a", "b"]);
    }

    #[test]
    fn order_commits_empty_and_idempotent() {
        assert!(order_commits(Vec::new()).is_empty());
        let sorted = order_commits(vec![record("a", 1), record("b", 2)]);
        assert_eq!(order_commits(sorted.clone()), sorted);
    }
}
