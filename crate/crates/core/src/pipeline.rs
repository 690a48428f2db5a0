//! End-to-end analysis pipeline: ingest -> resolve -> order -> measure ->
//! ctd -> classify -> fit -> estimate -> aggregate -> render.
//!
//! Errors are tagged with the stage that produced them so callers can
//! report where a run failed.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::impute::{estimate_history, EffortEstimate, EffortSource};
use crate::ingest::{
    collect_from_git, order_commits, parse_jsonl, resolve_authors, CommitRecord, IdentityMap,
};
use crate::metrics::{
    measure_commit_with_limit, ContributionMeasure, MetricKind, ProfileRegistry,
    DEFAULT_LARGE_FILE_CHARS,
};
use crate::rates::{
    build_samples, exclude_zero_rates, fit_model, select_rho, RateBounds, RateModel, RateSample,
    DEFAULT_MIN_SUPPORT,
};
use crate::report::{aggregate, render, BucketKind, ReportFormat};
use crate::timedelta::{compute_ctds, CommitTimeDelta};

/// Where commits come from: a git repository or a JSONL export.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    GitRepo(PathBuf),
    JsonlFile(PathBuf),
}

/// Everything one `analyze` run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub metric: MetricKind,
    pub bounds: RateBounds,
    pub min_support: usize,
    pub cap_enabled: bool,
    pub bucket_kind: BucketKind,
    pub identity_map_path: Option<PathBuf>,
    pub since: Option<u64>,
    pub until: Option<u64>,
    pub format: ReportFormat,
    pub profiles_path: Option<PathBuf>,
    pub model_in: Option<PathBuf>,
    pub model_out: Option<PathBuf>,
    pub explain_commit: Option<String>,
    /// Measurement worker count; defaults to available processors.
    pub workers: Option<usize>,
    pub exclude_zero_rates: bool,
    pub large_file_chars: usize,
}

impl RunConfig {
    pub fn new(input: InputSource) -> Self {
        Self {
            input,
            metric: MetricKind::LevenshteinWords,
            bounds: RateBounds::default(),
            min_support: DEFAULT_MIN_SUPPORT,
            cap_enabled: true,
            bucket_kind: BucketKind::All,
            identity_map_path: None,
            since: None,
            until: None,
            format: ReportFormat::Csv,
            profiles_path: None,
            model_in: None,
            model_out: None,
            explain_commit: None,
            workers: None,
            exclude_zero_rates: false,
            large_file_chars: DEFAULT_LARGE_FILE_CHARS,
        }
    }
}

/// Result of a run: report bytes for stdout plus diagnostic lines for
/// stderr.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Vec<u8>,
    pub diagnostics: Vec<String>,
}

fn read_file(path: &PathBuf, what: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {what} {}: {e}", path.display())))
}

fn ingest(config: &RunConfig) -> Result<Vec<CommitRecord>> {
    match &config.input {
        InputSource::GitRepo(path) => collect_from_git(path, config.since, config.until),
        InputSource::JsonlFile(path) => {
            let text = read_file(path, "JSONL file")?;
            let records = parse_jsonl(&text)?;
            Ok(records
                .into_iter()
                .filter(|r| {
                    config.since.is_none_or(|s| r.timestamp >= s)
                        && config.until.is_none_or(|u| r.timestamp <= u)
                })
                .collect())
        }
    }
}

fn load_identity_map(config: &RunConfig) -> Result<IdentityMap> {
    match &config.identity_map_path {
        Some(path) => IdentityMap::from_json(&read_file(path, "identity map")?),
        None => Ok(IdentityMap::new()),
    }
}

fn load_registry(config: &RunConfig) -> Result<ProfileRegistry> {
    match &config.profiles_path {
        Some(path) => ProfileRegistry::from_json(&read_file(path, "profile file")?),
        None => Ok(ProfileRegistry::builtin()),
    }
}

fn measure_all(
    records: &[CommitRecord],
    config: &RunConfig,
    registry: &ProfileRegistry,
) -> Result<Vec<ContributionMeasure>> {
    let workers = config.workers.unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Input(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        records
            .par_iter()
            .map(|rec| {
                measure_commit_with_limit(rec, config.metric, registry, config.large_file_chars)
            })
            .collect()
    })
}

fn obtain_model(config: &RunConfig, samples: &[RateSample]) -> Result<(RateModel, String)> {
    match &config.model_in {
        Some(path) => {
            let model = RateModel::from_json(&read_file(path, "model file")?)?;
            if model.metric != config.metric {
                return Err(Error::ContractViolation(format!(
                    "model fitted on {} but run requested {}",
                    model.metric, config.metric
                )));
            }
            Ok((model, format!("loaded model from {}", path.display())))
        }
        None => {
            let model = fit_model(samples, &config.bounds)?;
            let note = format!(
                "fitted global rate {:.4} {}-units/h from {} observed samples",
                model.global_rho, model.metric, model.total_support
            );
            Ok((model, note))
        }
    }
}

/// Per-commit artifacts from every stage, aligned by index over the
/// non-merge commit stream.
struct ExplainContext<'a> {
    records: &'a [CommitRecord],
    measures: &'a [ContributionMeasure],
    ctds: &'a [CommitTimeDelta],
    samples: &'a [RateSample],
    estimates: &'a [EffortEstimate],
    model: &'a RateModel,
    min_support: usize,
}

fn explain_text(commit_id: &str, ctx: &ExplainContext) -> Result<String> {
    let ExplainContext {
        records,
        measures,
        ctds,
        samples,
        estimates,
        model,
        min_support,
    } = *ctx;
    if records.iter().any(|r| r.commit_id == commit_id && r.is_merge) {
        return Err(Error::Input(format!(
            "commit {commit_id} is a merge; merges carry no measured contribution"
        )));
    }
    let idx = samples
        .iter()
        .position(|s| s.commit_id == commit_id)
        .ok_or_else(|| {
            Error::Input(format!("commit {commit_id} not found in the analyzed history"))
        })?;
    let (measure, ctd, sample, estimate) = (&measures[idx], &ctds[idx], &samples[idx], &estimates[idx]);

    let mut out = String::new();
    out.push_str(&format!("commit:        {}\n", sample.commit_id));
    out.push_str(&format!("author:        {}\n", sample.author_id));
    out.push_str(&format!("metric:        {}", measure.requested_metric));
    if measure.fallback_applied {
        out.push_str(" (word-distance fallback applied)");
    }
    out.push('\n');
    for file in &measure.per_file {
        out.push_str(&format!(
            "  file:        {} delta {} ({})\n",
            file.path, file.file_delta, file.effective_metric
        ));
    }
    out.push_str(&format!("delta_l:       {}\n", sample.delta_l));
    match (ctd.ctd_seconds, &ctd.antecedent_id) {
        (Some(seconds), Some(prev)) => {
            out.push_str(&format!(
                "ctd_seconds:   {seconds} (since antecedent {prev})\n"
            ));
        }
        _ => out.push_str("ctd_seconds:   none (author's first commit)\n"),
    }
    out.push_str(&format!("class:         {}\n", sample.class));

    match estimate.source {
        EffortSource::Measured => {
            out.push_str(&format!(
                "delta_t_hours: {:.6} = ctd / 3600 (measured)\n",
                estimate.delta_t_hours
            ));
        }
        EffortSource::Imputed => {
            let rho = estimate
                .rho_used
                .unwrap_or_else(|| select_rho(model, &sample.author_id, min_support));
            let scope = match model.per_author.get(&sample.author_id) {
                Some(r) if r.support >= min_support => {
                    format!("per-author, support {}", r.support)
                }
                _ => "global".to_string(),
            };
            out.push_str(&format!("rho:           {rho} ({scope})\n"));
            out.push_str(&format!(
                "imputed:       {:.6} h = delta_l / rho = {} / {rho}\n",
                sample.delta_l / rho,
                sample.delta_l
            ));
            match sample.ctd_seconds {
                Some(seconds) => out.push_str(&format!(
                    "cap:           {:.6} h wall clock, {}\n",
                    seconds as f64 / 3600.0,
                    if estimate.capped { "capped" } else { "not binding" }
                )),
                None => out.push_str("cap:           none (no antecedent)\n"),
            }
            out.push_str(&format!("delta_t_hours: {:.6}\n", estimate.delta_t_hours));
        }
    }
    out.push_str(&format!("source:        {:?}\n", estimate.source).to_lowercase());
    out.push_str(&format!("capped:        {}\n", estimate.capped));
    Ok(out)
}

/// Execute the full pipeline for one configuration.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let mut diagnostics = Vec::new();

    let records = ingest(config).map_err(|e| e.at_stage("ingest"))?;
    let map = load_identity_map(config).map_err(|e| e.at_stage("resolve"))?;
    let records = resolve_authors(records, &map);
    let records = order_commits(records);

    let merge_count = records.iter().filter(|r| r.is_merge).count();
    let working: Vec<CommitRecord> = records.iter().filter(|r| !r.is_merge).cloned().collect();
    diagnostics.push(format!(
        "analyzed {} commits ({} merges excluded from measurement)",
        records.len(),
        merge_count
    ));

    let registry = load_registry(config).map_err(|e| e.at_stage("measure"))?;
    let measures =
        measure_all(&working, config, &registry).map_err(|e| e.at_stage("measure"))?;
    let ctds = compute_ctds(&working).map_err(|e| e.at_stage("ctd"))?;

    let samples =
        build_samples(&measures, &ctds, &config.bounds).map_err(|e| e.at_stage("classify"))?;
    let fitting_samples: Vec<RateSample> = if config.exclude_zero_rates {
        exclude_zero_rates(samples.clone())
    } else {
        samples.clone()
    };

    let (model, note) =
        obtain_model(config, &fitting_samples).map_err(|e| e.at_stage("fit"))?;
    diagnostics.push(note);
    if let Some(path) = &config.model_out {
        std::fs::write(path, model.to_json())
            .map_err(|e| Error::Input(format!("cannot write model {}: {e}", path.display())))
            .map_err(|e| e.at_stage("fit"))?;
        diagnostics.push(format!("wrote model to {}", path.display()));
    }

    let estimates = estimate_history(&samples, &model, config.min_support, config.cap_enabled)
        .map_err(|e| e.at_stage("estimate"))?;

    if let Some(commit_id) = &config.explain_commit {
        let ctx = ExplainContext {
            records: &records,
            measures: &measures,
            ctds: &ctds,
            samples: &samples,
            estimates: &estimates,
            model: &model,
            min_support: config.min_support,
        };
        let text = explain_text(commit_id, &ctx).map_err(|e| e.at_stage("explain"))?;
        return Ok(RunOutput {
            report: text.into_bytes(),
            diagnostics,
        });
    }

    let rows = aggregate(&estimates, &records, config.bucket_kind)
        .map_err(|e| e.at_stage("aggregate"))?;
    let report = render(&rows, config.format).map_err(|e| e.at_stage("render"))?;
    Ok(RunOutput {
        report,
        diagnostics,
    })
}
