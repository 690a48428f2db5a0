//! Per-commit effort estimates: measured time for observed intervals,
//! imputed time (size divided by model rate, capped by wall clock) for
//! unobserved ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::{select_rho, ObservationClass, RateModel, RateSample};

/// Where an estimate's hours come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffortSource {
    /// The interval's own time delta.
    Measured,
    /// Contribution size divided by the model rate.
    Imputed,
}

/// Estimated person-hours for one commit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortEstimate {
    pub commit_id: String,
    pub author_id: String,
    pub delta_t_hours: f64,
    pub source: EffortSource,
    /// True when the wall-clock cap bound the imputed value.
    pub capped: bool,
    pub rho_used: Option<f64>,
    pub delta_l: f64,
}

/// Hours implied by a contribution size at a model rate.
pub fn impute_time(delta_l: f64, rho: f64) -> Result<f64> {
    if rho.is_nan() || rho <= 0.0 {
        return Err(Error::Domain(format!(
            "model rate must be positive, got {rho}"
        )));
    }
    if delta_l.is_nan() || delta_l < 0.0 {
        return Err(Error::Domain(format!(
            "contribution size must be non-negative, got {delta_l}"
        )));
    }
    Ok(delta_l / rho)
}

/// Estimate one commit's effort.
///
/// Observed and degenerate intervals are taken at face value: the time
/// delta is the effort. Unobserved intervals are imputed from the model
/// rate; when a time delta exists it caps the imputed value, since a
/// developer cannot have worked longer on the commit than the wall-clock
/// gap (`cap_enabled` false disables the cap). An author's first commit
/// has no gap and is imputed uncapped.
pub fn estimate_commit_effort(
    sample: &RateSample,
    model: &RateModel,
    min_support: usize,
    cap_enabled: bool,
) -> Result<EffortEstimate> {
    if sample.metric != model.metric {
        return Err(Error::ContractViolation(format!(
            "sample for {} measured with {} but model fitted on {}",
            sample.commit_id, sample.metric, model.metric
        )));
    }

    let estimate = match sample.class {
        ObservationClass::Observed | ObservationClass::Degenerate => {
            let ctd = sample.ctd_seconds.ok_or_else(|| {
                Error::ContractViolation(format!(
                    "{} classified {} without a time delta",
                    sample.commit_id, sample.class
                ))
            })?;
            EffortEstimate {
                commit_id: sample.commit_id.clone(),
                author_id: sample.author_id.clone(),
                delta_t_hours: ctd as f64 / 3600.0,
                source: EffortSource::Measured,
                capped: false,
                rho_used: None,
                delta_l: sample.delta_l,
            }
        }
        ObservationClass::Unobserved => {
            let rho = select_rho(model, &sample.author_id, min_support);
            let raw = impute_time(sample.delta_l, rho)?;
            let (hours, capped) = match sample.ctd_seconds {
                Some(ctd) if cap_enabled => {
                    let wall = ctd as f64 / 3600.0;
                    if raw > wall {
                        (wall, true)
                    } else {
                        (raw, false)
                    }
                }
                _ => (raw, false),
            };
            EffortEstimate {
                commit_id: sample.commit_id.clone(),
                author_id: sample.author_id.clone(),
                delta_t_hours: hours,
                source: EffortSource::Imputed,
                capped,
                rho_used: Some(rho),
                delta_l: sample.delta_l,
            }
        }
    };
    Ok(estimate)
}

/// Estimate every sample, preserving order; errors carry the commit id.
pub fn estimate_history(
    samples: &[RateSample],
    model: &RateModel,
    min_support: usize,
    cap_enabled: bool,
) -> Result<Vec<EffortEstimate>> {
    samples
        .iter()
        .map(|s| estimate_commit_effort(s, model, min_support, cap_enabled))
        .collect()
}
