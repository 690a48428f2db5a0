//! `crim` — estimate developer person-hours from commit history.
//!
//! Exit codes: 0 success, 2 when there are not enough observed samples to
//! fit a rate model, 1 for input and environment errors.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crim_core::ingest::render_jsonl;
use crim_core::metrics::{MetricKind, ProfileRegistry};
use crim_core::pipeline::{run, InputSource, RunConfig};
use crim_core::rates::RateBounds;
use crim_core::report::{BucketKind, ReportFormat};
use crim_core::synth::{generate, GapProfile, SynthParams};
use crim_core::Error;

#[derive(Parser)]
#[command(name = "crim", version, about = "Developer effort estimation from commit history")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a repository or JSONL export and print an effort report.
    Analyze(Box<AnalyzeArgs>),
    /// Generate a synthetic history with known ground truth.
    Synth(SynthArgs),
    /// Inspect language profiles.
    Profiles {
        #[command(subcommand)]
        action: ProfilesAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    /// Lines added, removed or changed.
    Loc,
    /// Word-level edit distance.
    Lev,
    /// Decision-point complexity delta.
    Cc,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Loc => MetricKind::LocDelta,
            MetricArg::Lev => MetricKind::LevenshteinWords,
            MetricArg::Cc => MetricKind::CyclomaticDelta,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BucketArg {
    Week,
    Month,
    All,
}

impl From<BucketArg> for BucketKind {
    fn from(b: BucketArg) -> Self {
        match b {
            BucketArg::Week => BucketKind::Week,
            BucketArg::Month => BucketKind::Month,
            BucketArg::All => BucketKind::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Path to a git repository (or use --jsonl).
    repo: Option<PathBuf>,
    /// Read commits from a JSONL export instead of a repository.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    /// Key/value configuration file; command-line flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Contribution-size metric [default: lev].
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Shortest delta (seconds) counted as observed [default: 60].
    #[arg(long)]
    t_min: Option<u64>,
    /// Longest delta (seconds) counted as observed [default: 28800].
    #[arg(long)]
    t_max: Option<u64>,
    /// Fraction of rates trimmed from each end before averaging [default: 0.05].
    #[arg(long)]
    trim: Option<f64>,
    /// Observed samples an author needs for a personal rate [default: 5].
    #[arg(long)]
    min_support: Option<usize>,
    /// Do not cap imputed hours at the wall-clock gap.
    #[arg(long)]
    no_cap: bool,
    /// Reporting period [default: all].
    #[arg(long, value_enum)]
    bucket: Option<BucketArg>,
    /// JSON file mapping author spellings to canonical ids.
    #[arg(long)]
    identity_map: Option<PathBuf>,
    /// Ignore commits authored before this Unix timestamp.
    #[arg(long)]
    since: Option<u64>,
    /// Ignore commits authored after this Unix timestamp.
    #[arg(long)]
    until: Option<u64>,
    /// Report encoding [default: csv].
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// JSON file of language profiles replacing the built-ins.
    #[arg(long)]
    profiles: Option<PathBuf>,
    /// Score with a previously fitted model instead of fitting.
    #[arg(long)]
    model_in: Option<PathBuf>,
    /// Write the fitted model to this file.
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Print the full derivation for one commit instead of the report.
    #[arg(long, value_name = "COMMIT")]
    explain: Option<String>,
    /// Measurement worker threads [default: available processors].
    #[arg(long)]
    workers: Option<usize>,
    /// Drop observed zero-size intervals before fitting.
    #[arg(long)]
    exclude_zero_rates: bool,
    /// Files above this many characters are measured by line diff
    /// [default: 1000000].
    #[arg(long)]
    large_file_chars: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// RNG seed; equal seeds reproduce the history exactly.
    #[arg(long)]
    seed: u64,
    /// Number of commits to generate.
    #[arg(long)]
    commits: usize,
    /// Number of authors.
    #[arg(long, default_value_t = 1)]
    authors: usize,
    /// True contribution rate in words per hour.
    #[arg(long, default_value_t = 60.0)]
    rho: f64,
    /// Log-space standard deviation of per-commit rate noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Probability that a non-first commit sits behind a long idle gap.
    #[arg(long, default_value_t = 0.3)]
    gap_prob: f64,
    /// Mean of the extra idle injected on long gaps, in hours.
    #[arg(long, default_value_t = 24.0)]
    gap_mean_hours: f64,
    /// Where to write the JSONL history.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the ground-truth CSV.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ProfilesAction {
    /// Print the built-in language profiles as loadable JSON.
    Dump,
}

/// Plain `key = value` configuration, one entry per line, `#` comments.
fn parse_config_file(path: &PathBuf) -> Result<HashMap<String, String>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Input(format!(
                "config {} line {}: expected key = value",
                path.display(),
                idx + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn cfg_parse<T: std::str::FromStr>(
    cfg: &HashMap<String, String>,
    key: &str,
) -> Result<Option<T>, Error> {
    match cfg.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| Error::Input(format!("config key {key}: cannot parse {raw:?}"))),
    }
}

fn cfg_flag(cfg: &HashMap<String, String>, key: &str) -> Result<bool, Error> {
    Ok(cfg_parse::<bool>(cfg, key)?.unwrap_or(false))
}

fn metric_from_str(raw: &str) -> Result<MetricKind, Error> {
    match raw {
        "loc" => Ok(MetricKind::LocDelta),
        "lev" => Ok(MetricKind::LevenshteinWords),
        "cc" => Ok(MetricKind::CyclomaticDelta),
        other => Err(Error::Input(format!("unknown metric {other:?}"))),
    }
}

fn bucket_from_str(raw: &str) -> Result<BucketKind, Error> {
    match raw {
        "week" => Ok(BucketKind::Week),
        "month" => Ok(BucketKind::Month),
        "all" => Ok(BucketKind::All),
        other => Err(Error::Input(format!("unknown bucket {other:?}"))),
    }
}

fn format_from_str(raw: &str) -> Result<ReportFormat, Error> {
    match raw {
        "csv" => Ok(ReportFormat::Csv),
        "json" => Ok(ReportFormat::Json),
        other => Err(Error::Input(format!("unknown format {other:?}"))),
    }
}

fn build_run_config(args: &AnalyzeArgs) -> Result<RunConfig, Error> {
    let cfg = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };

    let repo = args
        .repo
        .clone()
        .or(cfg_parse::<PathBuf>(&cfg, "repo")?);
    let jsonl = args
        .jsonl
        .clone()
        .or(cfg_parse::<PathBuf>(&cfg, "jsonl")?);
    let input = match (repo, jsonl) {
        (Some(_), Some(_)) => {
            return Err(Error::Input(
                "give either a repository path or --jsonl, not both".to_string(),
            ))
        }
        (Some(path), None) => InputSource::GitRepo(path),
        (None, Some(path)) => InputSource::JsonlFile(path),
        (None, None) => {
            return Err(Error::Input(
                "no input: pass a repository path or --jsonl FILE".to_string(),
            ))
        }
    };

    let metric = match (&args.metric, cfg.get("metric")) {
        (Some(m), _) => (*m).into(),
        (None, Some(raw)) => metric_from_str(raw)?,
        (None, None) => MetricKind::LevenshteinWords,
    };
    let bucket_kind = match (&args.bucket, cfg.get("bucket")) {
        (Some(b), _) => (*b).into(),
        (None, Some(raw)) => bucket_from_str(raw)?,
        (None, None) => BucketKind::All,
    };
    let format = match (&args.format, cfg.get("format")) {
        (Some(f), _) => (*f).into(),
        (None, Some(raw)) => format_from_str(raw)?,
        (None, None) => ReportFormat::Csv,
    };

    let defaults = RateBounds::default();
    let bounds = RateBounds::new(
        args.t_min
            .or(cfg_parse(&cfg, "t-min")?)
            .unwrap_or(defaults.t_min_seconds),
        args.t_max
            .or(cfg_parse(&cfg, "t-max")?)
            .unwrap_or(defaults.t_max_seconds),
        args.trim
            .or(cfg_parse(&cfg, "trim")?)
            .unwrap_or(defaults.trim_fraction),
    )?;

    let mut config = RunConfig::new(input);
    config.metric = metric;
    config.bounds = bounds;
    config.min_support = args
        .min_support
        .or(cfg_parse(&cfg, "min-support")?)
        .unwrap_or(config.min_support);
    config.cap_enabled = !(args.no_cap || cfg_flag(&cfg, "no-cap")?);
    config.bucket_kind = bucket_kind;
    config.identity_map_path = args
        .identity_map
        .clone()
        .or(cfg_parse(&cfg, "identity-map")?);
    config.since = args.since.or(cfg_parse(&cfg, "since")?);
    config.until = args.until.or(cfg_parse(&cfg, "until")?);
    config.format = format;
    config.profiles_path = args.profiles.clone().or(cfg_parse(&cfg, "profiles")?);
    config.model_in = args.model_in.clone().or(cfg_parse(&cfg, "model-in")?);
    config.model_out = args.model_out.clone().or(cfg_parse(&cfg, "model-out")?);
    config.explain_commit = args.explain.clone().or_else(|| cfg.get("explain").cloned());
    config.workers = args.workers.or(cfg_parse(&cfg, "workers")?);
    config.exclude_zero_rates = args.exclude_zero_rates || cfg_flag(&cfg, "exclude-zero-rates")?;
    config.large_file_chars = args
        .large_file_chars
        .or(cfg_parse(&cfg, "large-file-chars")?)
        .unwrap_or(config.large_file_chars);
    Ok(config)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Error> {
    let config = build_run_config(args)?;
    let output = run(&config)?;
    for line in &output.diagnostics {
        eprintln!("{line}");
    }
    std::io::stdout()
        .write_all(&output.report)
        .map_err(Error::Io)?;
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Error> {
    let params = SynthParams {
        seed: args.seed,
        n_commits: args.commits,
        n_authors: args.authors,
        true_rho: args.rho,
        noise_sigma: args.noise,
        gap_profile: GapProfile {
            long_gap_probability: args.gap_prob,
            mean_extra_idle_hours: args.gap_mean_hours,
        },
    };
    let (records, truth) = generate(&params)?;
    std::fs::write(&args.out, render_jsonl(&records))
        .map_err(|e| Error::Input(format!("cannot write {}: {e}", args.out.display())))?;
    eprintln!("wrote {} commits to {}", records.len(), args.out.display());
    if let Some(truth_path) = &args.truth {
        std::fs::write(truth_path, truth.to_csv())
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", truth_path.display())))?;
        eprintln!("wrote ground truth to {}", truth_path.display());
    }
    Ok(())
}

fn cmd_profiles_dump() -> Result<(), Error> {
    std::io::stdout()
        .write_all(ProfileRegistry::builtin().to_json().as_bytes())
        .map_err(Error::Io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match &cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Profiles {
            action: ProfilesAction::Dump,
        } => cmd_profiles_dump(),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_insufficient_data() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
