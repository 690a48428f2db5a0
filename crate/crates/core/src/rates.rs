//! Contribution rates: turn (size, time-delta) pairs into rate samples,
//! split observed from unobserved intervals, and fit the bounded
//! trimmed-mean rate model used for imputation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{ContributionMeasure, MetricKind};
use crate::timedelta::CommitTimeDelta;

pub const DEFAULT_T_MIN_SECONDS: u64 = 60;
pub const DEFAULT_T_MAX_SECONDS: u64 = 28_800;
pub const DEFAULT_TRIM_FRACTION: f64 = 0.05;
pub const DEFAULT_MIN_SUPPORT: usize = 5;

/// How a commit's time delta relates to the observation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationClass {
    /// Delta within [t_min, t_max]: plausibly continuous work.
    Observed,
    /// Delta above t_max or absent: wall-clock time overstates work.
    Unobserved,
    /// Delta below t_min: too short to carry a meaningful rate.
    Degenerate,
}

impl std::fmt::Display for ObservationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ObservationClass::Observed => "observed",
            ObservationClass::Unobserved => "unobserved",
            ObservationClass::Degenerate => "degenerate",
        })
    }
}

/// Observation window and trim setting for rate fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBounds {
    pub t_min_seconds: u64,
    pub t_max_seconds: u64,
    pub trim_fraction: f64,
}

impl RateBounds {
    pub fn new(t_min_seconds: u64, t_max_seconds: u64, trim_fraction: f64) -> Result<Self> {
        if t_min_seconds == 0 {
            return Err(Error::Input("t_min must be positive".to_string()));
        }
        if t_min_seconds >= t_max_seconds {
            return Err(Error::Input(format!(
                "t_min ({t_min_seconds}) must be below t_max ({t_max_seconds})"
            )));
        }
        if !(0.0..0.5).contains(&trim_fraction) {
            return Err(Error::Input(format!(
                "trim fraction {trim_fraction} outside [0, 0.5)"
            )));
        }
        Ok(Self {
            t_min_seconds,
            t_max_seconds,
            trim_fraction,
        })
    }
}

impl Default for RateBounds {
    fn default() -> Self {
        Self {
            t_min_seconds: DEFAULT_T_MIN_SECONDS,
            t_max_seconds: DEFAULT_T_MAX_SECONDS,
            trim_fraction: DEFAULT_TRIM_FRACTION,
        }
    }
}

/// One commit's contribution size joined with its time delta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub commit_id: String,
    pub author_id: String,
    pub delta_l: f64,
    pub metric: MetricKind,
    pub ctd_seconds: Option<u64>,
    /// Present exactly for observed samples with a positive delta.
    pub rate_units_per_hour: Option<f64>,
    pub class: ObservationClass,
}

/// Size produced per hour over one interval: delta_l / (ctd / 3600).
pub fn contribution_rate(delta_l: f64, ctd_seconds: u64) -> Result<f64> {
    if ctd_seconds == 0 {
        return Err(Error::Domain(
            "contribution rate undefined for a zero time delta".to_string(),
        ));
    }
    Ok(delta_l * 3600.0 / ctd_seconds as f64)
}

/// Place a time delta in the observation window.
pub fn classify(ctd_seconds: Option<u64>, bounds: &RateBounds) -> ObservationClass {
    match ctd_seconds {
        None => ObservationClass::Unobserved,
        Some(ctd) if ctd < bounds.t_min_seconds => ObservationClass::Degenerate,
        Some(ctd) if ctd > bounds.t_max_seconds => ObservationClass::Unobserved,
        Some(_) => ObservationClass::Observed,
    }
}

/// Join measures with their time deltas into classified rate samples.
///
/// Both slices must be aligned 1:1 on the same commit stream.
pub fn build_samples(
    measures: &[ContributionMeasure],
    ctds: &[CommitTimeDelta],
    bounds: &RateBounds,
) -> Result<Vec<RateSample>> {
    if measures.len() != ctds.len() {
        return Err(Error::ContractViolation(format!(
            "{} measures vs {} time deltas",
            measures.len(),
            ctds.len()
        )));
    }
    measures
        .iter()
        .zip(ctds)
        .map(|(measure, ctd)| {
            if measure.commit_id != ctd.commit_id {
                return Err(Error::ContractViolation(format!(
                    "measure for {} paired with delta for {}",
                    measure.commit_id, ctd.commit_id
                )));
            }
            let class = classify(ctd.ctd_seconds, bounds);
            let rate = match (class, ctd.ctd_seconds) {
                (ObservationClass::Observed, Some(s)) if s > 0 => {
                    Some(contribution_rate(measure.delta_l, s)?)
                }
                _ => None,
            };
            Ok(RateSample {
                commit_id: measure.commit_id.clone(),
                author_id: ctd.author_id.clone(),
                delta_l: measure.delta_l,
                metric: measure.requested_metric,
                ctd_seconds: ctd.ctd_seconds,
                rate_units_per_hour: rate,
                class,
            })
        })
        .collect()
}

/// Drop observed samples whose contribution size is zero; optional
/// pre-fitting filter for callers that consider zero-output intervals
/// unrepresentative.
pub fn exclude_zero_rates(samples: Vec<RateSample>) -> Vec<RateSample> {
    samples
        .into_iter()
        .filter(|s| !(s.class == ObservationClass::Observed && s.delta_l == 0.0))
        .collect()
}

fn insufficient() -> Error {
    Error::InsufficientData("insufficient observed samples to fit MBCR".to_string())
}

/// Trimmed mean of the observed rates: sort ascending, drop
/// floor(trim * n) from each end, average the rest.
///
/// Trimming blunts the outlier sensitivity of a plain mean. Errors when no
/// observed rates remain, or when those that do average to zero (a zero
/// model rate cannot impute time).
pub fn fit_mbcr(samples: &[RateSample], trim_fraction: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(Error::Input(format!(
            "trim fraction {trim_fraction} outside [0, 0.5)"
        )));
    }
    let mut rates: Vec<f64> = samples
        .iter()
        .filter(|s| s.class == ObservationClass::Observed)
        .filter_map(|s| s.rate_units_per_hour)
        .collect();
    if rates.is_empty() {
        return Err(insufficient());
    }
    rates.sort_by(|a, b| a.partial_cmp(b).expect("rates are finite"));
    let drop = (trim_fraction * rates.len() as f64).floor() as usize;
    let kept = &rates[drop..rates.len() - drop];
    if kept.is_empty() {
        return Err(insufficient());
    }
    let mean = kept.iter().sum::<f64>() / kept.len() as f64;
    if mean <= 0.0 {
        return Err(Error::InsufficientData(
            "observed rates average to zero; no positive rate to fit".to_string(),
        ));
    }
    Ok(mean)
}

/// Per-author fitted rate with the number of observed samples behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerAuthorRate {
    pub rho: f64,
    pub support: usize,
}

/// Fitted model rates: a global value plus per-author values where an
/// author has observed support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    pub metric: MetricKind,
    pub bounds: RateBounds,
    pub global_rho: f64,
    pub total_support: usize,
    pub per_author: BTreeMap<String, PerAuthorRate>,
}

impl RateModel {
    /// Parse the documented JSON model format.
    pub fn from_json(text: &str) -> Result<Self> {
        let model: RateModel = serde_json::from_str(text)
            .map_err(|e| Error::Input(format!("malformed model file: {e}")))?;
        RateBounds::new(
            model.bounds.t_min_seconds,
            model.bounds.t_max_seconds,
            model.bounds.trim_fraction,
        )?;
        if model.global_rho <= 0.0 {
            return Err(Error::Input("model global rho must be positive".to_string()));
        }
        if model.per_author.values().any(|r| r.rho <= 0.0) {
            return Err(Error::Input("model per-author rho must be positive".to_string()));
        }
        Ok(model)
    }

    /// Serialize to the same JSON format `from_json` accepts.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("model serializes cleanly");
        out.push('\n');
        out
    }
}

/// Fit the global rate and one rate per author with observed support.
///
/// Authors whose observed rates average to zero fall back to the global
/// rate at selection time and get no per-author entry.
pub fn fit_model(samples: &[RateSample], bounds: &RateBounds) -> Result<RateModel> {
    let metric = match samples.first() {
        Some(first) => first.metric,
        None => return Err(insufficient()),
    };
    if samples.iter().any(|s| s.metric != metric) {
        return Err(Error::ContractViolation(
            "samples mix contribution metrics".to_string(),
        ));
    }

    let global_rho = fit_mbcr(samples, bounds.trim_fraction)?;
    let total_support = samples
        .iter()
        .filter(|s| s.class == ObservationClass::Observed && s.rate_units_per_hour.is_some())
        .count();

    let mut by_author: BTreeMap<&str, Vec<&RateSample>> = BTreeMap::new();
    for sample in samples {
        by_author.entry(&sample.author_id).or_default().push(sample);
    }
    let mut per_author = BTreeMap::new();
    for (author, group) in by_author {
        let support = group
            .iter()
            .filter(|s| s.class == ObservationClass::Observed && s.rate_units_per_hour.is_some())
            .count();
        if support == 0 {
            continue;
        }
        let owned: Vec<RateSample> = group.into_iter().cloned().collect();
        match fit_mbcr(&owned, bounds.trim_fraction) {
            Ok(rho) => {
                per_author.insert(author.to_string(), PerAuthorRate { rho, support });
            }
            Err(Error::InsufficientData(_)) => continue,
            Err(e) => return Err(e),
        }
    }

    Ok(RateModel {
        metric,
        bounds: *bounds,
        global_rho,
        total_support,
        per_author,
    })
}

/// The rate to impute with for one author: their own fitted rate when it
/// has at least `min_support` observed samples behind it, otherwise the
/// global rate.
pub fn select_rho(model: &RateModel, author_id: &str, min_support: usize) -> f64 {
    match model.per_author.get(author_id) {
        Some(r) if r.support >= min_support => r.rho,
        _ => model.global_rho,
    }
}
