//! Estimate developer person-hours from version-control history.
//!
//! The library measures how much each commit changed (lines, words or
//! decision-point complexity), derives time deltas between an author's
//! consecutive commits, fits a bounded trimmed-mean contribution rate
//! from the intervals short enough to represent continuous work, and uses
//! that rate to impute hours for the intervals that are not — capped by
//! wall-clock time so a long idle gap never inflates the estimate.
//!
//! See the `crim` binary for the command-line frontend.

pub mod error;
pub mod impute;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod rates;
pub mod report;
pub mod synth;
pub mod timedelta;

pub use error::{Error, Result};
