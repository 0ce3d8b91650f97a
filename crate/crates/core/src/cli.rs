//! The `docdrift` command line.
//!
//! Settings resolve as flag, then environment variable, then the JSON
//! config file given by `--config`, then the built-in default.

use std::ffi::OsString;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::analysis::DetectionResult;
use crate::error::{Error, Result};
use crate::evaluation::{
    ablate, compute_function_metrics, compute_inconsistency_metrics, AblationConfig, FindingLabel, GroundTruthLabel,
    MetricsSummary,
};
use crate::extraction::{scan_corpus, CodeDocPair, FilterConfig, SourceLanguage};
use crate::jsonl::{read_jsonl, write_file, write_jsonl};
use crate::llm_client::{self, ChatClient, TransportMode};
use crate::pipeline::{detect, tally, DetectConfig};
use crate::prompting::{ProjectKind, ProjectMeta, PromptVariant};
use crate::reporting::{render_report, write_summary, ReportHeader};

pub const PAIRS_FILE: &str = "pairs.jsonl";
pub const RESULTS_FILE: &str = "results.jsonl";
pub const REPORT_FILE: &str = "report.html";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FIXTURES_DIR: &str = "fixtures";
pub const ABLATION_JSON: &str = "ablation.json";
pub const ABLATION_TEXT: &str = "ablation.txt";

const AFTER_HELP: &str = "\
Run directory (--out):
  pairs.jsonl     extracted pairs, one JSON record per line
  results.jsonl   one detection result per pair, in pair order
  report.html     self-contained HTML report of flagged pairs
  summary.json    totals, flag rate and a per-pair verdict index
  fixtures/       recorded model responses, one <key>.json per request
  ablation.json   per-variant comparison table (also ablation.txt)

Environment:
  DOCDRIFT_API_BASE   chat-completions base URL, e.g. http://localhost:8000/v1 (live/record)
  DOCDRIFT_API_KEY    bearer token for the endpoint (optional; never written anywhere)
  DOCDRIFT_CONFIG     JSON config file, same as --config
  DOCDRIFT_OUT, DOCDRIFT_VARIANT, DOCDRIFT_LANGUAGE, DOCDRIFT_PROJECT_NAME,
  DOCDRIFT_PROJECT_KIND, DOCDRIFT_MODEL, DOCDRIFT_TRANSPORT, DOCDRIFT_CONCURRENCY,
  DOCDRIFT_MIN_TOKENS, DOCDRIFT_SAMPLE, DOCDRIFT_SEED
                      defaults for the matching flags

Exit codes:
  0  success
  1  I/O, file format or report error
  2  configuration error
  3  corpus error
  4  transport error
  5  replay fixture miss
  6  label or evaluation error";

#[derive(Debug, Parser)]
#[command(name = "docdrift", version, about = "Find functions whose documentation disagrees with their code", after_help = AFTER_HELP)]
struct Cli {
    /// JSON config file; flags and environment variables take precedence
    #[arg(long, global = true, env = "DOCDRIFT_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scan a source tree and write pairs.jsonl
    Extract(ExtractArgs),
    /// Prompt the model for every pair and write results.jsonl
    Detect(DetectArgs),
    /// Write report.html and summary.json from results
    Report(ReportArgs),
    /// Score results against label files
    Eval(EvalArgs),
    /// Compare prompt variants over the same pairs
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
struct OutArg {
    /// Run directory
    #[arg(long, env = "DOCDRIFT_OUT")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    #[arg(long, env = "DOCDRIFT_PROJECT_NAME")]
    project_name: Option<String>,
    /// library, framework or project
    #[arg(long, env = "DOCDRIFT_PROJECT_KIND")]
    project_kind: Option<String>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, env = "DOCDRIFT_MODEL")]
    model: Option<String>,
    /// live, record or replay
    #[arg(long, env = "DOCDRIFT_TRANSPORT")]
    transport: Option<String>,
    #[arg(long, env = "DOCDRIFT_CONCURRENCY")]
    concurrency: Option<usize>,
    /// Fixture directory [default: <out>/fixtures]
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Pairs file [default: <out>/pairs.jsonl]
    #[arg(long)]
    pairs: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Corpus root directory
    corpus: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
    /// python, typescript, cpp or java
    #[arg(long, env = "DOCDRIFT_LANGUAGE")]
    language: Option<String>,
    #[command(flatten)]
    project: ProjectArgs,
    /// Keep pairs whose doc and code both have more than this many tokens
    #[arg(long, env = "DOCDRIFT_MIN_TOKENS")]
    min_tokens: Option<usize>,
    /// Keep duplicate (doc, code) pairs
    #[arg(long)]
    no_dedupe: bool,
    /// Random sample size
    #[arg(long, env = "DOCDRIFT_SAMPLE")]
    sample: Option<NonZeroUsize>,
    /// Sampling seed [default: 0]
    #[arg(long, env = "DOCDRIFT_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[command(flatten)]
    out: OutArg,
    /// V1, V2, V3, V4, V6, V7 or DP [default: DP]
    #[arg(long, env = "DOCDRIFT_VARIANT")]
    variant: Option<String>,
    #[command(flatten)]
    project: ProjectArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Leave raw model output out of results.jsonl
    #[arg(long)]
    elide_raw: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    out: OutArg,
    /// Pairs file [default: <out>/pairs.jsonl]
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Results file [default: <out>/results.jsonl]
    #[arg(long)]
    results: Option<PathBuf>,
    /// Model name shown in the report header
    #[arg(long, env = "DOCDRIFT_MODEL")]
    model: Option<String>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    out: OutArg,
    /// Results file [default: <out>/results.jsonl]
    #[arg(long)]
    results: Option<PathBuf>,
    /// Ground-truth labels, one {pair_id, consistent, note?} per line
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Finding labels, one {finding_id, judgment, category_note?} per line
    #[arg(long)]
    finding_labels: Option<PathBuf>,
    /// Print metrics as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    out: OutArg,
    /// Comma-separated variants, e.g. V1,DP
    #[arg(long, value_delimiter = ',')]
    variants: Vec<String>,
    #[command(flatten)]
    project: ProjectArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Ground-truth labels for function-level metrics
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Print the table as JSON
    #[arg(long)]
    json: bool,
}

/// Config file layout; every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub project: FileProject,
    pub language: Option<String>,
    pub corpus_root: Option<PathBuf>,
    pub variant: Option<String>,
    pub model: Option<String>,
    pub transport: Option<String>,
    pub filters: FileFilters,
    pub output_dir: Option<PathBuf>,
    pub concurrency: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileProject {
    pub name: Option<String>,
    pub kind: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileFilters {
    pub min_tokens: Option<usize>,
    pub dedupe: Option<bool>,
    pub sample_size: Option<NonZeroUsize>,
    pub sample_seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))
    }
}

fn missing(what: &str, flag: &str) -> Error {
    Error::Config(format!("{what} is not set (use {flag}, its environment variable, or the config file)"))
}

fn out_dir(arg: &OutArg, file: &FileConfig) -> Result<PathBuf> {
    arg.out
        .clone()
        .or_else(|| file.output_dir.clone())
        .ok_or_else(|| missing("run directory", "--out"))
}

fn project_kind(args: &ProjectArgs, file: &FileConfig) -> Result<ProjectKind> {
    args.project_kind
        .as_deref()
        .or(file.project.kind.as_deref())
        .map_or(Ok(ProjectKind::Project), str::parse)
}

fn project_meta(args: &ProjectArgs, file: &FileConfig, pairs: &[CodeDocPair]) -> Result<ProjectMeta> {
    let name = args
        .project_name
        .clone()
        .or_else(|| file.project.name.clone())
        .or_else(|| pairs.first().map(|p| p.project.clone()).filter(|n| !n.is_empty()))
        .ok_or_else(|| missing("project name", "--project-name"))?;
    Ok(ProjectMeta::new(name, project_kind(args, file)?))
}

struct ModelSettings {
    model: String,
    transport: TransportMode,
    concurrency: usize,
    fixtures: PathBuf,
    pairs: PathBuf,
}

fn model_settings(args: &ModelArgs, file: &FileConfig, out: &Path) -> Result<ModelSettings> {
    let model = args
        .model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| missing("model", "--model"))?;
    let transport = args
        .transport
        .as_deref()
        .or(file.transport.as_deref())
        .map_or(Ok(TransportMode::Replay), str::parse)?;
    let concurrency = args
        .concurrency
        .or(file.concurrency)
        .unwrap_or(llm_client::DEFAULT_MAX_IN_FLIGHT);
    if concurrency == 0 {
        return Err(Error::Config("concurrency must be at least 1".into()));
    }
    Ok(ModelSettings {
        model,
        transport,
        concurrency,
        fixtures: args.fixtures.clone().unwrap_or_else(|| out.join(FIXTURES_DIR)),
        pairs: args.pairs.clone().unwrap_or_else(|| out.join(PAIRS_FILE)),
    })
}

fn client_for(settings: &ModelSettings) -> Result<ChatClient> {
    llm_client::set_max_in_flight(settings.concurrency);
    ChatClient::from_env(settings.transport, Some(settings.fixtures.clone())).map_err(|e| Error::Config(e.to_string()))
}

fn cmd_extract(args: &ExtractArgs, file: &FileConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let out = out_dir(&args.out, file)?;
    let root = args
        .corpus
        .clone()
        .or_else(|| file.corpus_root.clone())
        .ok_or_else(|| missing("corpus root", "the CORPUS argument"))?;
    let language: SourceLanguage = args
        .language
        .as_deref()
        .or(file.language.as_deref())
        .ok_or_else(|| missing("language", "--language"))?
        .parse()?;
    let project = args
        .project
        .project_name
        .clone()
        .or_else(|| file.project.name.clone())
        .ok_or_else(|| missing("project name", "--project-name"))?;
    let defaults = FilterConfig::default();
    let filters = FilterConfig {
        min_tokens: args
            .min_tokens
            .or(file.filters.min_tokens)
            .unwrap_or(defaults.min_tokens),
        dedupe: !args.no_dedupe && file.filters.dedupe.unwrap_or(defaults.dedupe),
        sample_size: args.sample.or(file.filters.sample_size),
        sample_seed: args.seed.or(file.filters.sample_seed),
    };

    let report = scan_corpus(&root, &project, language, &filters)?;
    let path = out.join(PAIRS_FILE);
    write_jsonl(&path, &report.pairs)?;
    let d = &report.diagnostics;
    for skipped in &d.files_skipped {
        let _ = writeln!(stderr, "skipped {}: {}", skipped.path, skipped.reason);
    }
    for note in &d.notes {
        let _ = writeln!(stderr, "note: {note}");
    }
    let _ = writeln!(
        stdout,
        "extract: {} pairs written to {} ({} files scanned, {} skipped; {} extracted, {} at or below {} tokens, {} duplicates, {} sampled out)",
        report.pairs.len(),
        path.display(),
        d.files_scanned,
        d.files_skipped.len(),
        d.extracted,
        d.filter.below_min_tokens,
        filters.min_tokens,
        d.filter.duplicates,
        d.filter.sampled_out,
    );
    Ok(())
}

fn cmd_detect(args: &DetectArgs, file: &FileConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let out = out_dir(&args.out, file)?;
    let variant: PromptVariant = args
        .variant
        .as_deref()
        .or(file.variant.as_deref())
        .map_or(Ok(PromptVariant::Dp), str::parse)?;
    let settings = model_settings(&args.model, file, &out)?;
    let pairs: Vec<CodeDocPair> = read_jsonl(&settings.pairs)?;
    let project = if pairs.is_empty() {
        // nothing will be prompted, so any name will do
        project_meta(&args.project, file, &pairs).unwrap_or_else(|_| ProjectMeta::new("", ProjectKind::Project))
    } else {
        project_meta(&args.project, file, &pairs)?
    };
    let client = client_for(&settings)?;
    let config = DetectConfig {
        variant,
        project,
        model: settings.model.clone(),
        concurrency: settings.concurrency,
    };
    let _ = writeln!(
        stderr,
        "detect: {} pairs, variant {variant}, transport {}",
        pairs.len(),
        settings.transport
    );
    let mut results = detect(&pairs, &config, &client)?;
    if args.elide_raw {
        for r in &mut results {
            r.raw_text.clear();
        }
    }
    let path = out.join(RESULTS_FILE);
    write_jsonl(&path, &results)?;
    let t = tally(&results);
    let _ = writeln!(
        stdout,
        "detect: {} results written to {} ({} flagged, {} malformed)",
        t.pairs,
        path.display(),
        t.flagged,
        t.malformed
    );
    Ok(())
}

fn cmd_report(args: &ReportArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let out = out_dir(&args.out, file)?;
    let pairs: Vec<CodeDocPair> = read_jsonl(&args.pairs.clone().unwrap_or_else(|| out.join(PAIRS_FILE)))?;
    let results: Vec<DetectionResult> = read_jsonl(&args.results.clone().unwrap_or_else(|| out.join(RESULTS_FILE)))?;
    let header = ReportHeader {
        model: args
            .model
            .clone()
            .or_else(|| file.model.clone())
            .unwrap_or_else(|| "unspecified".into()),
    };
    let html = render_report(&results, &pairs, &header)?;
    write_file(&out.join(REPORT_FILE), &html)?;
    write_file(&out.join(SUMMARY_FILE), &write_summary(&results))?;
    let t = tally(&results);
    let _ = writeln!(
        stdout,
        "report: {} flagged of {} pairs; wrote {} and {}",
        t.flagged,
        t.pairs,
        out.join(REPORT_FILE).display(),
        out.join(SUMMARY_FILE).display()
    );
    Ok(())
}

/// Metrics for one results file, as printed by `eval`.
pub fn evaluate(
    results: &[DetectionResult],
    labels: Option<&[GroundTruthLabel]>,
    finding_labels: Option<&[FindingLabel]>,
) -> Result<MetricsSummary> {
    let function = match labels {
        Some(labels) => {
            let ev = compute_function_metrics(results, labels)?;
            if !ev.unmatched.is_empty() {
                return Err(Error::Label(format!(
                    "{} result(s) have no ground-truth label: {}",
                    ev.unmatched.len(),
                    ev.unmatched.join(", ")
                )));
            }
            Some(ev.metrics)
        }
        None => None,
    };
    let inconsistency = match finding_labels {
        Some(fl) => Some(compute_inconsistency_metrics(results, fl)?),
        None => None,
    };
    Ok(MetricsSummary { function, inconsistency })
}

fn cmd_eval(args: &EvalArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    if args.labels.is_none() && args.finding_labels.is_none() {
        return Err(Error::Config("eval needs --labels and/or --finding-labels".into()));
    }
    let results_path = match &args.results {
        Some(p) => p.clone(),
        None => out_dir(&args.out, file)?.join(RESULTS_FILE),
    };
    let results: Vec<DetectionResult> = read_jsonl(&results_path)?;
    let labels: Option<Vec<GroundTruthLabel>> = args.labels.as_deref().map(read_jsonl).transpose()?;
    let finding_labels: Option<Vec<FindingLabel>> = args.finding_labels.as_deref().map(read_jsonl).transpose()?;
    let summary = evaluate(&results, labels.as_deref(), finding_labels.as_deref())?;
    let text = if args.json { summary.to_json() } else { summary.to_text() };
    let _ = stdout.write_all(text.as_bytes());
    Ok(())
}

fn cmd_ablate(args: &AblateArgs, file: &FileConfig, stdout: &mut dyn Write) -> Result<()> {
    let out = out_dir(&args.out, file)?;
    let variants = args
        .variants
        .iter()
        .filter(|v| !v.trim().is_empty())
        .map(|v| v.parse())
        .collect::<Result<Vec<PromptVariant>>>()?;
    let settings = model_settings(&args.model, file, &out)?;
    let pairs: Vec<CodeDocPair> = read_jsonl(&settings.pairs)?;
    let labels: Option<Vec<GroundTruthLabel>> = args.labels.as_deref().map(read_jsonl).transpose()?;
    if variants.is_empty() {
        return Err(Error::Config("no variants requested".into()));
    }
    let config = AblationConfig {
        project: project_meta(&args.project, file, &pairs)?,
        model: settings.model.clone(),
        concurrency: settings.concurrency,
    };
    let client = client_for(&settings)?;
    let table = ablate(&pairs, &variants, &client, &config, labels.as_deref())?;
    let json = table.to_json();
    let text = table.to_text();
    write_file(&out.join(ABLATION_JSON), &json)?;
    write_file(&out.join(ABLATION_TEXT), &text)?;
    let _ = stdout.write_all(if args.json { json } else { text }.as_bytes());
    Ok(())
}

/// Parses `args` (including the program name) and runs one subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return e.exit_code();
        }
    };
    match dispatch(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Extract(a) => cmd_extract(a, &file, stdout, stderr),
        Command::Detect(a) => cmd_detect(a, &file, stdout, stderr),
        Command::Report(a) => cmd_report(a, &file, stdout),
        Command::Eval(a) => cmd_eval(a, &file, stdout),
        Command::Ablate(a) => cmd_ablate(a, &file, stdout),
    }
}
