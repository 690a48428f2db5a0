//! Synthetic commit histories with known ground truth, used to validate
//! the whole estimation pipeline end to end.
//!
//! Efforts are drawn in whole minutes and contribution sizes are realized
//! as real token edits in file text, so a generated history flows through
//! ingestion and measurement unmodified. Commits designated as long-gap
//! get enough idle time injected to land above the default observation
//! window; everything else has no idle at all, so observed intervals carry
//! the true rate by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impute::{EffortEstimate, EffortSource};
use crate::ingest::{CommitRecord, FileChange};
use crate::rates::DEFAULT_T_MAX_SECONDS;

/// Idle model: each non-first commit is a long gap with this probability,
/// receiving idle of one default observation window plus an exponential
/// extra with the given mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapProfile {
    pub long_gap_probability: f64,
    pub mean_extra_idle_hours: f64,
}

impl Default for GapProfile {
    fn default() -> Self {
        Self {
            long_gap_probability: 0.3,
            mean_extra_idle_hours: 24.0,
        }
    }
}

/// Generation parameters; `true_rho` is in words per hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    pub n_commits: usize,
    pub n_authors: usize,
    pub true_rho: f64,
    /// Log-space standard deviation of per-commit rate noise.
    pub noise_sigma: f64,
    pub gap_profile: GapProfile,
}

/// Ground truth for one generated commit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub commit_id: String,
    pub author_id: String,
    pub true_effort_hours: f64,
    pub true_rate: f64,
}

/// Per-commit truth aligned with the generated records.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub rows: Vec<TruthRow>,
}

impl GroundTruth {
    /// Render the truth table as CSV: commit_id, hours, rate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("commit_id,true_effort_hours,true_rate\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                row.commit_id, row.true_effort_hours, row.true_rate
            ));
        }
        out
    }
}

const BASE_TIMESTAMP: u64 = 1_600_000_000;
const EFFORT_MIN_MINUTES: u64 = 30;
const EFFORT_MAX_MINUTES: u64 = 240;
/// Rotate to a fresh file once the current one holds this many tokens,
/// bounding the cost of measuring each commit.
const FILE_ROTATE_TOKENS: usize = 1000;
/// Tokens per line in generated files.
const TOKENS_PER_LINE: usize = 8;

fn validate(params: &SynthParams) -> Result<()> {
    if params.n_commits == 0 {
        return Err(Error::Params("n_commits must be at least 1".to_string()));
    }
    if params.n_authors == 0 {
        return Err(Error::Params("n_authors must be at least 1".to_string()));
    }
    if !(params.true_rho > 0.0 && params.true_rho.is_finite()) {
        return Err(Error::Params(format!(
            "true_rho must be positive, got {}",
            params.true_rho
        )));
    }
    if !(params.noise_sigma >= 0.0 && params.noise_sigma.is_finite()) {
        return Err(Error::Params(format!(
            "noise_sigma must be non-negative, got {}",
            params.noise_sigma
        )));
    }
    let gp = &params.gap_profile;
    if !(0.0..=1.0).contains(&gp.long_gap_probability) {
        return Err(Error::Params(format!(
            "long_gap_probability {} outside [0, 1]",
            gp.long_gap_probability
        )));
    }
    if !(gp.mean_extra_idle_hours >= 0.0 && gp.mean_extra_idle_hours.is_finite()) {
        return Err(Error::Params(format!(
            "mean_extra_idle_hours must be non-negative, got {}",
            gp.mean_extra_idle_hours
        )));
    }
    Ok(())
}

fn render_tokens(tokens: &[String]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(if i % TOKENS_PER_LINE == 0 { '\n' } else { ' ' });
        }
        out.push_str(tok);
    }
    out
}

struct AuthorState {
    clock: u64,
    committed: bool,
    file_index: usize,
    tokens: Vec<String>,
}

/// Generate a commit history plus its ground truth, deterministically for
/// a fixed seed.
pub fn generate(params: &SynthParams) -> Result<(Vec<CommitRecord>, GroundTruth)> {
    validate(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let extra_idle = if params.gap_profile.mean_extra_idle_hours > 0.0 {
        Some(Exp::new(1.0 / params.gap_profile.mean_extra_idle_hours).expect("positive mean"))
    } else {
        None
    };

    let mut authors: Vec<AuthorState> = (0..params.n_authors)
        .map(|i| AuthorState {
            clock: BASE_TIMESTAMP + i as u64,
            committed: false,
            file_index: 0,
            tokens: Vec::new(),
        })
        .collect();

    let mut records = Vec::with_capacity(params.n_commits);
    let mut truth = GroundTruth::default();
    let mut token_counter = 0usize;

    for index in 0..params.n_commits {
        let author_idx = rng.gen_range(0..params.n_authors as u64) as usize;
        let minutes = rng.gen_range(EFFORT_MIN_MINUTES..=EFFORT_MAX_MINUTES);
        let z: f64 = StandardNormal.sample(&mut rng);
        let rate = params.true_rho * (params.noise_sigma * z).exp();
        let effort_hours = minutes as f64 / 60.0;
        let intended = (effort_hours * rate).round();
        if intended < 1.0 {
            return Err(Error::Params(format!(
                "commit {index} draws an edit count below 1 \
                 (rate {rate:.3} over {effort_hours:.2} h); \
                 raise true_rho or lower noise_sigma"
            )));
        }
        let edit_count = intended as usize;

        let idle_seconds = if authors[author_idx].committed
            && rng.gen_bool(params.gap_profile.long_gap_probability)
        {
            let extra = match &extra_idle {
                Some(exp) => (exp.sample(&mut rng) * 3600.0).round() as u64,
                None => 0,
            };
            DEFAULT_T_MAX_SECONDS + 1 + extra
        } else {
            0
        };

        let state = &mut authors[author_idx];
        state.clock += idle_seconds + minutes * 60;

        let fresh: Vec<String> = (0..edit_count)
            .map(|_| {
                token_counter += 1;
                format!("w{token_counter}")
            })
            .collect();
        let (before, after_tokens) =
            if state.tokens.is_empty() || state.tokens.len() + edit_count > FILE_ROTATE_TOKENS {
                state.file_index += 1;
                (None, fresh)
            } else {
                let mut appended = state.tokens.clone();
                appended.extend(fresh);
                (Some(render_tokens(&state.tokens)), appended)
            };
        let path = format!("notes/dev{author_idx}/part{:03}.txt", state.file_index);
        let after = render_tokens(&after_tokens);
        state.tokens = after_tokens;

        let commit_id = format!("synth-{index:06}");
        let author_email = format!("dev{author_idx}@synth.example");
        records.push(CommitRecord {
            commit_id: commit_id.clone(),
            author_name: format!("Dev {author_idx}"),
            author_email: author_email.clone(),
            author_id: String::new(),
            timestamp: state.clock,
            is_merge: false,
            files: vec![FileChange {
                path,
                before_content: before,
                after_content: Some(after),
                is_binary: false,
            }],
        });
        truth.rows.push(TruthRow {
            commit_id,
            author_id: author_email,
            true_effort_hours: effort_hours,
            true_rate: rate,
        });
        authors[author_idx].committed = true;
    }
    Ok((records, truth))
}

/// Error statistics, in percent. `count` is the number of commits the
/// statistics cover; all values are zero when it is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub count: usize,
    pub mape_percent: f64,
    pub mdape_percent: f64,
    /// Signed total-effort error: (sum estimated - sum true) / sum true.
    pub total_relative_error_percent: f64,
}

/// Estimate accuracy against ground truth, over imputed commits and over
/// all commits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub imputed: ErrorStats,
    pub all: ErrorStats,
}

fn stats(pairs: &[(f64, f64)]) -> ErrorStats {
    if pairs.is_empty() {
        return ErrorStats {
            count: 0,
            mape_percent: 0.0,
            mdape_percent: 0.0,
            total_relative_error_percent: 0.0,
        };
    }
    let mut apes: Vec<f64> = pairs
        .iter()
        .map(|(est, truth)| (est - truth).abs() / truth * 100.0)
        .collect();
    apes.sort_by(|a, b| a.partial_cmp(b).expect("finite percentages"));
    let mape = apes.iter().sum::<f64>() / apes.len() as f64;
    let mid = apes.len() / 2;
    let mdape = if apes.len() % 2 == 1 {
        apes[mid]
    } else {
        (apes[mid - 1] + apes[mid]) / 2.0
    };
    let est_total: f64 = pairs.iter().map(|(e, _)| e).sum();
    let true_total: f64 = pairs.iter().map(|(_, t)| t).sum();
    ErrorStats {
        count: pairs.len(),
        mape_percent: mape,
        mdape_percent: mdape,
        total_relative_error_percent: (est_total - true_total) / true_total * 100.0,
    }
}

/// Compare estimates against ground truth; estimates must cover exactly
/// the truth's commits (any order).
pub fn evaluate(truth: &GroundTruth, estimates: &[EffortEstimate]) -> Result<AccuracyReport> {
    if truth.rows.len() != estimates.len() {
        return Err(Error::ContractViolation(format!(
            "{} truth rows vs {} estimates",
            truth.rows.len(),
            estimates.len()
        )));
    }
    let by_id: std::collections::HashMap<&str, &TruthRow> = truth
        .rows
        .iter()
        .map(|r| (r.commit_id.as_str(), r))
        .collect();

    let mut seen = std::collections::HashSet::new();
    let mut all_pairs = Vec::with_capacity(estimates.len());
    let mut imputed_pairs = Vec::new();
    for est in estimates {
        if !seen.insert(est.commit_id.as_str()) {
            return Err(Error::ContractViolation(format!(
                "duplicate estimate for commit {}",
                est.commit_id
            )));
        }
        let row = by_id.get(est.commit_id.as_str()).ok_or_else(|| {
            Error::ContractViolation(format!(
                "estimate for unknown commit {}",
                est.commit_id
            ))
        })?;
        let pair = (est.delta_t_hours, row.true_effort_hours);
        all_pairs.push(pair);
        if est.source == EffortSource::Imputed {
            imputed_pairs.push(pair);
        }
    }
    Ok(AccuracyReport {
        imputed: stats(&imputed_pairs),
        all: stats(&all_pairs),
    })
}
