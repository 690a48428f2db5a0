//! Aggregation of effort estimates into per-developer, per-period report
//! rows, rendered deterministically as CSV or JSON.

use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impute::{EffortEstimate, EffortSource};
use crate::ingest::CommitRecord;

/// Reporting period granularity. Weeks start Monday 00:00 UTC, months on
/// the 1st 00:00 UTC; `All` collapses everything into one bucket at the
/// epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BucketKind {
    Week,
    Month,
    All,
}

impl BucketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BucketKind::Week => "week",
            BucketKind::Month => "month",
            BucketKind::All => "all",
        }
    }
}

/// Report output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// One (author, period) row of the effort report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortReportRow {
    pub author_id: String,
    /// Bucket start, seconds since the Unix epoch (UTC).
    pub bucket_start: u64,
    pub bucket_kind: BucketKind,
    pub commits: usize,
    pub measured_hours: f64,
    pub imputed_hours: f64,
    pub total_hours: f64,
    pub capped_count: usize,
}

fn civil_date(timestamp: u64) -> Result<NaiveDate> {
    let dt = DateTime::from_timestamp(timestamp as i64, 0)
        .ok_or_else(|| Error::Input(format!("timestamp {timestamp} out of calendar range")))?;
    Ok(dt.date_naive())
}

fn date_start_seconds(date: NaiveDate) -> u64 {
    date.and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
        .timestamp() as u64
}

fn bucket_start(timestamp: u64, kind: BucketKind) -> Result<u64> {
    match kind {
        BucketKind::All => Ok(0),
        BucketKind::Week => {
            let date = civil_date(timestamp)?;
            Ok(date_start_seconds(date.week(Weekday::Mon).first_day()))
        }
        BucketKind::Month => {
            let date = civil_date(timestamp)?;
            Ok(date_start_seconds(
                date.with_day(1).expect("day 1 exists in every month"),
            ))
        }
    }
}

#[derive(Default)]
struct Accumulator {
    commits: usize,
    measured_hours: f64,
    imputed_hours: f64,
    capped_count: usize,
}

/// Group estimates by (author, bucket) and sum hours per source.
///
/// `records` supplies commit timestamps; every estimate's commit must be
/// present there. Rows come out sorted by (author_id, bucket_start).
pub fn aggregate(
    estimates: &[EffortEstimate],
    records: &[CommitRecord],
    bucket_kind: BucketKind,
) -> Result<Vec<EffortReportRow>> {
    let timestamps: HashMap<&str, u64> = records
        .iter()
        .map(|r| (r.commit_id.as_str(), r.timestamp))
        .collect();

    let mut buckets: BTreeMap<(String, u64), Accumulator> = BTreeMap::new();
    for est in estimates {
        let ts = *timestamps.get(est.commit_id.as_str()).ok_or_else(|| {
            Error::ContractViolation(format!(
                "estimate for commit {} has no matching record",
                est.commit_id
            ))
        })?;
        let start = bucket_start(ts, bucket_kind)?;
        let acc = buckets
            .entry((est.author_id.clone(), start))
            .or_default();
        acc.commits += 1;
        match est.source {
            EffortSource::Measured => acc.measured_hours += est.delta_t_hours,
            EffortSource::Imputed => acc.imputed_hours += est.delta_t_hours,
        }
        if est.capped {
            acc.capped_count += 1;
        }
    }

    Ok(buckets
        .into_iter()
        .map(|((author_id, start), acc)| EffortReportRow {
            author_id,
            bucket_start: start,
            bucket_kind,
            commits: acc.commits,
            measured_hours: acc.measured_hours,
            imputed_hours: acc.imputed_hours,
            total_hours: acc.measured_hours + acc.imputed_hours,
            capped_count: acc.capped_count,
        })
        .collect())
}

/// Render rows as bytes: CSV with a fixed header, RFC 4180 quoting, hours
/// to four decimals and LF line endings, or JSON with full-precision
/// numbers. Equal rows yield identical bytes.
pub fn render(rows: &[EffortReportRow], format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer
                .write_record([
                    "author_id",
                    "bucket_start",
                    "bucket_kind",
                    "commits",
                    "measured_hours",
                    "imputed_hours",
                    "total_hours",
                    "capped_count",
                ])
                .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
            for row in rows {
                writer
                    .write_record([
                        row.author_id.clone(),
                        row.bucket_start.to_string(),
                        row.bucket_kind.as_str().to_string(),
                        row.commits.to_string(),
                        format!("{:.4}", row.measured_hours),
                        format!("{:.4}", row.imputed_hours),
                        format!("{:.4}", row.total_hours),
                        row.capped_count.to_string(),
                    ])
                    .map_err(|e| Error::Input(format!("csv write failed: {e}")))?;
            }
            writer
                .into_inner()
                .map_err(|e| Error::Input(format!("csv write failed: {e}")))
        }
        ReportFormat::Json => {
            let mut text =
                serde_json::to_string_pretty(rows).expect("report rows serialize cleanly");
            text.push('\n');
            Ok(text.into_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(id: &str, ts: u64) -> CommitRecord {
        CommitRecord {
            commit_id: id.to_string(),
            author_name: "A".to_string(),
            author_email: "a@x".to_string(),
            author_id: "a@x".to_string(),
            timestamp: ts,
            is_merge: false,
            files: Vec::new(),
        }
    }

    fn estimate(id: &str, author: &str, hours: f64, source: EffortSource) -> EffortEstimate {
        EffortEstimate {
            commit_id: id.to_string(),
            author_id: author.to_string(),
            delta_t_hours: hours,
            source,
            capped: false,
            rho_used: None,
            delta_l: 0.0,
        }
    }

    // 2021-01-04 was a Monday.
    const MONDAY: u64 = 1_609_718_400;

    #[test]
    fn same_week_estimates_sum() {
        let records = vec![record("c1", MONDAY + 3600), record("c2", MONDAY + 86_400)];
        let estimates = vec![
            estimate("c1", "a", 1.0, EffortSource::Measured),
            estimate("c2", "a", 1.0, EffortSource::Measured),
        ];
        let rows = aggregate(&estimates, &records, BucketKind::Week).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].bucket_start, MONDAY);
        assert_eq!(rows[0].measured_hours, 2.0);
        assert_eq!(rows[0].imputed_hours, 0.0);
        assert_eq!(rows[0].total_hours, 2.0);
        assert_eq!(rows[0].commits, 2);
    }

    #[test]
    fn week_bucket_starts_on_monday() {
        // Sunday one second before next Monday stays in the prior week.
        let sunday_late = MONDAY + 7 * 86_400 - 1;
        let records = vec![record("c1", sunday_late), record("c2", MONDAY + 7 * 86_400)];
        let estimates = vec![
            estimate("c1", "a", 1.0, EffortSource::Measured),
            estimate("c2", "a", 1.0, EffortSource::Measured),
        ];
        let rows = aggregate(&estimates, &records, BucketKind::Week).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].bucket_start, MONDAY);
        assert_eq!(rows[1].bucket_start, MONDAY + 7 * 86_400);
    }

    #[test]
    fn month_bucket_starts_on_first() {
        // 2021-02-15 12:00 UTC.
        let records = vec![record("c1", 1_613_390_400)];
        let estimates = vec![estimate("c1", "a", 1.0, EffortSource::Imputed)];
        let rows = aggregate(&estimates, &records, BucketKind::Month).unwrap();
        // 2021-02-01 00:00 UTC.
        assert_eq!(rows[0].bucket_start, 1_612_137_600);
        assert_eq!(rows[0].imputed_hours, 1.0);
    }

    #[test]
    fn authors_split_under_all_bucket() {
        let records = vec![record("c1", 100), record("c2", 200)];
        let estimates = vec![
            estimate("c1", "a", 1.0, EffortSource::Measured),
            estimate("c2", "b", 2.0, EffortSource::Imputed),
        ];
        let rows = aggregate(&estimates, &records, BucketKind::All).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].author_id, "a");
        assert_eq!(rows[1].author_id, "b");
        assert_eq!(rows[0].bucket_start, 0);
    }

    #[test]
    fn empty_inputs_yield_empty_rows() {
        assert!(aggregate(&[], &[], BucketKind::Week).unwrap().is_empty());
    }

    #[test]
    fn csv_header_only_when_empty() {
        let bytes = render(&[], ReportFormat::Csv).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "author_id,bucket_start,bucket_kind,commits,measured_hours,imputed_hours,total_hours,capped_count\n"
        );
    }

    #[test]
    fn csv_one_row_two_lines() {
        let row = EffortReportRow {
            author_id: "a@x".to_string(),
            bucket_start: 0,
            bucket_kind: BucketKind::All,
            commits: 3,
            measured_hours: 1.25,
            imputed_hours: 0.5,
            total_hours: 1.75,
            capped_count: 1,
        };
        let text = String::from_utf8(render(&[row], ReportFormat::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "a@x,0,all,3,1.2500,0.5000,1.7500,1");
    }

    #[test]
    fn csv_quotes_embedded_commas() {
        let row = EffortReportRow {
            author_id: "Last, First".to_string(),
            bucket_start: 0,
            bucket_kind: BucketKind::All,
            commits: 1,
            measured_hours: 0.0,
            imputed_hours: 0.0,
            total_hours: 0.0,
            capped_count: 0,
        };
        let text = String::from_utf8(render(&[row], ReportFormat::Csv).unwrap()).unwrap();
        assert!(text.contains("\"Last, First\""));
    }

    #[test]
    fn json_field_names_match_csv_header() {
        let row = EffortReportRow {
            author_id: "a".to_string(),
            bucket_start: 7,
            bucket_kind: BucketKind::Week,
            commits: 1,
            measured_hours: 0.1,
            imputed_hours: 0.2,
            total_hours: 0.3,
            capped_count: 0,
        };
        let bytes = render(&[row], ReportFormat::Json).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let obj = &value[0];
        for key in [
            "author_id",
            "bucket_start",
            "bucket_kind",
            "commits",
            "measured_hours",
            "imputed_hours",
            "total_hours",
            "capped_count",
        ] {
            assert!(obj.get(key).is_some(), "missing {key}");
        }
        assert_eq!(obj["bucket_kind"], "week");
    }

    proptest! {
        #[test]
        fn no_hours_lost_in_bucketing(
            entries in prop::collection::vec(
                ("[ab]", 0u64..4_000_000_000, 0.0f64..50.0, prop::bool::ANY),
                0..30,
            ),
            kind in prop::sample::select(vec![BucketKind::Week, BucketKind::Month, BucketKind::All]),
        ) {
            let records: Vec<CommitRecord> = entries
                .iter()
                .enumerate()
                .map(|(i, (_, ts, _, _))| record(&format!("c{i}"), *ts))
                .collect();
            let estimates: Vec<EffortEstimate> = entries
                .iter()
                .enumerate()
                .map(|(i, (author, _, hours, imputed))| {
                    estimate(
                        &format!("c{i}"),
                        author,
                        *hours,
                        if *imputed { EffortSource::Imputed } else { EffortSource::Measured },
                    )
                })
                .collect();
            let rows = aggregate(&estimates, &records, kind).unwrap();
            let row_total: f64 = rows.iter().map(|r| r.total_hours).sum();
            let est_total: f64 = estimates.iter().map(|e| e.delta_t_hours).sum();
            prop_assert!((row_total - est_total).abs() <= 1e-9 * est_total.max(1.0));
            for row in &rows {
                prop_assert!(row.commits >= row.capped_count);
                prop_assert_eq!(row.total_hours, row.measured_hours + row.imputed_hours);
            }
        }

        #[test]
        fn rendering_is_pure(
            hours in prop::collection::vec(0.0f64..100.0, 0..10),
        ) {
            let rows: Vec<EffortReportRow> = hours
                .iter()
                .enumerate()
                .map(|(i, h)| EffortReportRow {
                    author_id: format!("dev{i}"),
                    bucket_start: i as u64 * 604_800,
                    bucket_kind: BucketKind::Week,
                    commits: i + 1,
                    measured_hours: *h,
                    imputed_hours: h / 2.0,
                    total_hours: h + h / 2.0,
                    capped_count: i,
                })
                .collect();
            prop_assert_eq!(
                render(&rows, ReportFormat::Csv).unwrap(),
                render(&rows, ReportFormat::Csv).unwrap()
            );
            prop_assert_eq!(
                render(&rows, ReportFormat::Json).unwrap(),
                render(&rows, ReportFormat::Json).unwrap()
            );
        }
    }
}
