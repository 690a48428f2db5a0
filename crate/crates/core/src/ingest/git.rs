//! Git history adapter built on the `git` executable.
//!
//! Enumeration uses `git log --date=unix` with a NUL-separated pretty
//! format so commit messages can never corrupt parsing; changed paths come
//! from `git diff-tree --raw -z`, and file contents from
//! `git show <rev>:<path>`. Merge commits are emitted flagged with an
//! empty file list; non-merge commits are diffed against their first
//! parent.

use std::path::Path;
use std::process::Command;

use crate::error::{Error, Result};
use crate::ingest::{order_commits, CommitRecord, FileChange};

/// Bytes inspected for a NUL when deciding whether content is binary.
const BINARY_SNIFF_LEN: usize = 8000;

/// Submodule entries carry this mode and have no blob content.
const GITLINK_MODE: &str = "160000";

fn run_git(repo: &Path, args: &[&str]) -> Result<Vec<u8>> {
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(args)
        .output()
        .map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::GitMissing(e.to_string())
            } else {
                Error::Io(e)
            }
        })?;
    if !output.status.success() {
        return Err(Error::Git {
            command: format!("git {}", args.join(" ")),
            stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
        });
    }
    Ok(output.stdout)
}

fn is_binary(bytes: &[u8]) -> bool {
    bytes[..bytes.len().min(BINARY_SNIFF_LEN)].contains(&0)
}

fn decode(bytes: Vec<u8>) -> String {
    String::from_utf8_lossy(&bytes).into_owned()
}

/// `git show <rev>:<path>`, decoded as UTF-8 with replacement, or `None`
/// when the blob is binary.
fn show_file(repo: &Path, rev: &str, path: &str) -> Result<Option<String>> {
    let spec = format!("{rev}:{path}");
    let bytes = run_git(repo, &["show", &spec])?;
    if is_binary(&bytes) {
        return Ok(None);
    }
    Ok(Some(decode(bytes)))
}

struct RawEntry {
    status: char,
    src_mode: String,
    dst_mode: String,
    path: String,
}

/// Parse `git diff-tree --raw -z` output: records of
/// `:srcmode dstmode srcsha dstsha status NUL path NUL`.
fn parse_raw_entries(bytes: &[u8]) -> Result<Vec<RawEntry>> {
    let mut entries = Vec::new();
    let mut fields = bytes.split(|b| *b == 0);
    loop {
        let meta = match fields.next() {
            None | Some([]) => break, // end of output or trailing NUL
            Some(m) => String::from_utf8_lossy(m).into_owned(),
        };
        let path = fields
            .next()
            .map(|p| String::from_utf8_lossy(p).into_owned())
            .ok_or_else(|| Error::Input("truncated diff-tree output".to_string()))?;
        let meta = meta.strip_prefix(':').unwrap_or(&meta);
        let parts: Vec<&str> = meta.split_whitespace().collect();
        if parts.len() != 5 {
            return Err(Error::Input(format!(
                "unexpected diff-tree record: {meta:?}"
            )));
        }
        let status = parts[4].chars().next().unwrap_or('?');
        entries.push(RawEntry {
            status,
            src_mode: parts[0].to_string(),
            dst_mode: parts[1].to_string(),
            path,
        });
    }
    Ok(entries)
}

fn collect_files(repo: &Path, commit: &str, parent: Option<&str>) -> Result<Vec<FileChange>> {
    let raw = run_git(
        repo,
        &["diff-tree", "--root", "--no-commit-id", "--raw", "-r", "-z", commit],
    )?;
    let mut files = Vec::new();
    for entry in parse_raw_entries(&raw)? {
        if entry.src_mode == GITLINK_MODE || entry.dst_mode == GITLINK_MODE {
            continue; // submodule pointers carry no measurable content
        }
        let (before, after) = match entry.status {
            'A' => (None, show_file(repo, commit, &entry.path)?),
            'D' => (parent.map_or(Ok(None), |p| show_file(repo, p, &entry.path))?, None),
            'M' | 'T' => (
                parent.map_or(Ok(None), |p| show_file(repo, p, &entry.path))?,
                show_file(repo, commit, &entry.path)?,
            ),
            other => {
                return Err(Error::Input(format!(
                    "unexpected diff-tree status '{other}' for {}",
                    entry.path
                )))
            }
        };
        // A None side on A/D is the created/deleted case; if both sides
        // decoded to None the change was binary.
        let binary = match entry.status {
            'A' => after.is_none(),
            'D' => before.is_none(),
            _ => before.is_none() && after.is_none(),
        };
        if binary {
            files.push(FileChange {
                path: entry.path,
                before_content: None,
                after_content: None,
                is_binary: true,
            });
        } else {
            files.push(FileChange {
                path: entry.path,
                before_content: before,
                after_content: after,
                is_binary: false,
            });
        }
    }
    Ok(files)
}

/// Read commit history from a local git repository.
///
/// Returns every commit reachable from HEAD whose author timestamp lies in
/// the inclusive `[since, until]` window, ordered by
/// (timestamp, commit_id). Non-merge commits carry full before/after text
/// for every changed file (diffed against the first parent); merge commits
/// are flagged `is_merge` and carry no files.
pub fn collect_from_git(
    repo_path: &Path,
    since: Option<u64>,
    until: Option<u64>,
) -> Result<Vec<CommitRecord>> {
    if !repo_path.is_dir() {
        return Err(Error::Input(format!(
            "repository path {} is not a readable directory",
            repo_path.display()
        )));
    }

    let log = run_git(
        repo_path,
        &["log", "--date=unix", "--pretty=format:%H%x00%an%x00%ae%x00%at%x00%P"],
    )?;
    let log = String::from_utf8_lossy(&log);

    let mut records = Vec::new();
    for line in log.lines() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\0').collect();
        if fields.len() != 5 {
            return Err(Error::Input(format!("unexpected git log record: {line:?}")));
        }
        let (hash, name, email, at, parents) =
            (fields[0], fields[1], fields[2], fields[3], fields[4]);
        let timestamp: i64 = at
            .parse()
            .map_err(|_| Error::Input(format!("bad author timestamp {at:?} for {hash}")))?;
        if timestamp < 0 {
            return Err(Error::Input(format!(
                "negative author timestamp for {hash}"
            )));
        }
        let timestamp = timestamp as u64;
        if since.is_some_and(|s| timestamp < s) || until.is_some_and(|u| timestamp > u) {
            continue;
        }

        let parent_list: Vec<&str> = parents.split_whitespace().collect();
        let is_merge = parent_list.len() > 1;
        let files = if is_merge {
            Vec::new()
        } else {
            collect_files(repo_path, hash, parent_list.first().copied())?
        };
        records.push(CommitRecord {
            commit_id: hash.to_string(),
            author_name: name.to_string(),
            author_email: email.to_string(),
            author_id: String::new(),
            timestamp,
            is_merge,
            files,
        });
    }
    Ok(order_commits(records))
}
