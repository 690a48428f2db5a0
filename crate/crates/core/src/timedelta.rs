//! Commit time deltas: elapsed seconds between an author's consecutive
//! commits.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CommitRecord;

/// The gap between a commit and the same author's previous commit.
///
/// `antecedent_id` and `ctd_seconds` are absent together, exactly on each
/// author's first commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitTimeDelta {
    pub commit_id: String,
    pub author_id: String,
    pub antecedent_id: Option<String>,
    pub ctd_seconds: Option<u64>,
}

/// Compute one delta per input commit, chaining per author.
///
/// Callers must pass records ordered by (timestamp, commit_id) with
/// authors resolved and merge commits already excluded; output is aligned
/// 1:1 with the input.
pub fn compute_ctds(records: &[CommitRecord]) -> Result<Vec<CommitTimeDelta>> {
    let mut last_seen: HashMap<&str, (&str, u64)> = HashMap::new();
    let mut deltas = Vec::with_capacity(records.len());

    for rec in records {
        if rec.author_id.is_empty() {
            return Err(Error::ContractViolation(format!(
                "commit {} has an unresolved author_id",
                rec.commit_id
            )));
        }
        let delta = match last_seen.get(rec.author_id.as_str()) {
            Some(&(prev_id, prev_ts)) => {
                if prev_ts > rec.timestamp {
                    return Err(Error::ContractViolation(format!(
                        "records not ordered by timestamp at commit {}",
                        rec.commit_id
                    )));
                }
                CommitTimeDelta {
                    commit_id: rec.commit_id.clone(),
                    author_id: rec.author_id.clone(),
                    antecedent_id: Some(prev_id.to_string()),
                    ctd_seconds: Some(rec.timestamp - prev_ts),
                }
            }
            None => CommitTimeDelta {
                commit_id: rec.commit_id.clone(),
                author_id: rec.author_id.clone(),
                antecedent_id: None,
                ctd_seconds: None,
            },
        };
        last_seen.insert(&rec.author_id, (&rec.commit_id, rec.timestamp));
        deltas.push(delta);
    }
    Ok(deltas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(id: &str, author: &str, ts: u64) -> CommitRecord {
        CommitRecord {
            commit_id: id.to_string(),
            author_name: author.to_string(),
            author_email: format!("{author}@x"),
            author_id: author.to_string(),
            timestamp: ts,
            is_merge: false,
            files: Vec::new(),
        }
    }

    #[test]
    fn consecutive_commits_subtract() {
        let deltas =
            compute_ctds(&[record("c1", "a", 1000), record("c2", "a", 4600)]).unwrap();
        assert_eq!(deltas[0].ctd_seconds, None);
        assert_eq!(deltas[0].antecedent_id, None);
        assert_eq!(deltas[1].ctd_seconds, Some(3600));
        assert_eq!(deltas[1].antecedent_id.as_deref(), Some("c1"));
    }

    #[test]
    fn authors_chain_independently() {
        let deltas = compute_ctds(&[
            record("a1", "a", 0),
            record("b1", "b", 10),
            record("a2", "a", 100),
        ])
        .unwrap();
        assert_eq!(deltas[2].ctd_seconds, Some(100));
        assert_eq!(deltas[2].antecedent_id.as_deref(), Some("a1"));
        assert_eq!(deltas[1].ctd_seconds, None);
    }

    #[test]
    fn equal_timestamps_give_zero_delta() {
        let deltas = compute_ctds(&[record("c1", "a", 50), record("c2", "a", 50)]).unwrap();
        assert_eq!(deltas[1].ctd_seconds, Some(0));
    }

    #[test]
    fn unresolved_author_rejected() {
        let mut rec = record("c1", "a", 1);
        rec.author_id = String::new();
        assert!(matches!(
            compute_ctds(&[rec]),
            Err(Error::ContractViolation(_))
        ));
    }

    fn arbitrary_history() -> impl Strategy<Value = Vec<CommitRecord>> {
        prop::collection::vec(("[ab]", 0u64..10_000), 0..40).prop_map(|pairs| {
            let mut records: Vec<CommitRecord> = pairs
                .into_iter()
                .enumerate()
                .map(|(i, (author, ts))| record(&format!("c{i:03}"), &author, ts))
                .collect();
            records.sort_by(|x, y| {
                x.timestamp
                    .cmp(&y.timestamp)
                    .then_with(|| x.commit_id.cmp(&y.commit_id))
            });
            records
        })
    }

    proptest! {
        #[test]
        fn one_delta_per_commit_one_start_per_author(records in arbitrary_history()) {
            let deltas = compute_ctds(&records).unwrap();
            prop_assert_eq!(deltas.len(), records.len());
            let authors: std::collections::HashSet<&str> =
                records.iter().map(|r| r.author_id.as_str()).collect();
            let starts = deltas.iter().filter(|d| d.ctd_seconds.is_none()).count();
            prop_assert_eq!(starts, authors.len());
        }

        #[test]
        fn per_author_deltas_telescope(records in arbitrary_history()) {
            let deltas = compute_ctds(&records).unwrap();
            let authors: std::collections::HashSet<&str> =
                records.iter().map(|r| r.author_id.as_str()).collect();
            for author in authors {
                let ts: Vec<u64> = records
                    .iter()
                    .filter(|r| r.author_id == author)
                    .map(|r| r.timestamp)
                    .collect();
                let total: u64 = deltas
                    .iter()
                    .filter(|d| d.author_id == author)
                    .filter_map(|d| d.ctd_seconds)
                    .sum();
                prop_assert_eq!(total, ts.last().unwrap() - ts.first().unwrap());
            }
        }

        #[test]
        fn other_authors_do_not_disturb_deltas(records in arbitrary_history(), ts in 0u64..10_000) {
            let deltas_before: Vec<CommitTimeDelta> = compute_ctds(&records)
                .unwrap()
                .into_iter()
                .filter(|d| d.author_id == "a")
                .collect();

            let mut with_extra = records.clone();
            with_extra.push(record("zzz-extra", "b", ts));
            with_extra.sort_by(|x, y| {
                x.timestamp
                    .cmp(&y.timestamp)
                    .then_with(|| x.commit_id.cmp(&y.commit_id))
            });
            let deltas_after: Vec<CommitTimeDelta> = compute_ctds(&with_extra)
                .unwrap()
                .into_iter()
                .filter(|d| d.author_id == "a")
                .collect();
            prop_assert_eq!(deltas_before, deltas_after);
        }
    }
}
