//! C ABI for docdrift.
//!
//! Every call returns a [`DdStatus`]. On failure a message is kept per
//! thread and can be read with [`dd_last_error`]. Structured data crosses
//! the boundary as UTF-8 JSON: pairs and results are JSON arrays of the
//! same records the CLI writes one per line. Strings handed out by the
//! library must be released with [`dd_string_free`]; handles with their
//! own `_free` function. No call unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use docdrift::analysis::{parse_output, DetectionResult};
use docdrift::evaluation::{kappa_from_table, FindingLabel, GroundTruthLabel, MetricsSummary};
use docdrift::extraction::{scan_corpus, CodeDocPair, FilterConfig, SourceLanguage};
use docdrift::llm_client::{ChatClient, FixtureStore, TransportMode};
use docdrift::pipeline::{detect, DetectConfig};
use docdrift::prompting::{build_system_prompt, build_user_prompt, ProjectKind, ProjectMeta, PromptVariant};
use docdrift::reporting::{render_report, write_summary, ReportHeader};

/// Result of every call. The error values match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdStatus {
    Ok = 0,
    /// I/O, file format or report failure
    Failed = 1,
    Config = 2,
    Corpus = 3,
    Transport = 4,
    FixtureMiss = 5,
    Label = 6,
    NullArgument = 10,
    InvalidUtf8 = 11,
    InvalidJson = 12,
    Panic = 13,
}

/// A chat client (replay, record or live).
pub struct DdClient {
    inner: ChatClient,
}

/// Metrics computed from one results set.
pub struct DdMetrics {
    summary: MetricsSummary,
}

/// Function-level metrics. Rates are NaN when their denominator is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdFunctionMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub flag_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// Inconsistency-level metrics. Rates are NaN when nothing was labeled.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DdInconsistencyMetrics {
    pub findings: usize,
    pub tp: usize,
    pub fp: usize,
    pub precision: f64,
    pub under_promise: usize,
    pub under_promise_rate: f64,
}

struct Failure {
    status: DdStatus,
    message: String,
}

impl Failure {
    fn new(status: DdStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<docdrift::Error> for Failure {
    fn from(e: docdrift::Error) -> Self {
        let status = match e.exit_code() {
            2 => DdStatus::Config,
            3 => DdStatus::Corpus,
            4 => DdStatus::Transport,
            5 => DdStatus::FixtureMiss,
            6 => DdStatus::Label,
            _ => DdStatus::Failed,
        };
        Failure::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    // interior NULs would truncate the message; replace them
    let c = CString::new(message.replace('\0', "\u{FFFD}")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DdStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            DdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(DdStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(DdStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

fn json_arg<T: serde::de::DeserializeOwned>(text: &str, name: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::new(DdStatus::InvalidJson, format!("{name}: {e}")))
}

fn check_out<T>(out: *mut T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::new(DdStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Writes an owned C string to `out`. `out` must already be checked.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::new(DdStatus::Failed, "output contains a NUL byte"))?;
    *out = c.into_raw();
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure::new(DdStatus::Failed, e.to_string()))
}

fn rate(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a
/// successful one. Valid until the next `dd_` call on the same thread.
#[no_mangle]
pub extern "C" fn dd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn dd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Scans `root` and writes the surviving pairs as a JSON array.
/// `min_tokens` and `dedupe` follow the CLI filters; no sampling.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_pairs_json` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dd_extract(
    root: *const c_char,
    language: *const c_char,
    project: *const c_char,
    min_tokens: usize,
    dedupe: bool,
    out_pairs_json: *mut *mut c_char,
) -> DdStatus {
    guard(|| {
        check_out(out_pairs_json, "out_pairs_json")?;
        let root = str_arg(root, "root")?;
        let language: SourceLanguage = str_arg(language, "language")?.parse()?;
        let project = str_arg(project, "project")?;
        let filters = FilterConfig {
            min_tokens,
            dedupe,
            ..FilterConfig::none()
        };
        let report = scan_corpus(Path::new(root), project, language, &filters)?;
        put_string(out_pairs_json, to_json(&report.pairs)?)
    })
}

/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dd_system_prompt(
    variant: *const c_char,
    project_name: *const c_char,
    project_kind: *const c_char,
    out: *mut *mut c_char,
) -> DdStatus {
    guard(|| {
        check_out(out, "out")?;
        let variant: PromptVariant = str_arg(variant, "variant")?.parse()?;
        let kind: ProjectKind = str_arg(project_kind, "project_kind")?.parse()?;
        let meta = ProjectMeta::new(str_arg(project_name, "project_name")?, kind);
        put_string(out, build_system_prompt(variant, &meta))
    })
}

/// # Safety
/// `pair_json` must be a NUL-terminated JSON object; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_user_prompt(pair_json: *const c_char, out: *mut *mut c_char) -> DdStatus {
    guard(|| {
        check_out(out, "out")?;
        let pair: CodeDocPair = json_arg(str_arg(pair_json, "pair_json")?, "pair_json")?;
        put_string(out, build_user_prompt(&pair))
    })
}

/// Parses one raw model response into a detection result (JSON object).
/// Never fails on bad model output; that yields a malformed result.
///
/// # Safety
/// String arguments must be NUL-terminated; `out_result_json` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_parse_output(
    raw_text: *const c_char,
    variant: *const c_char,
    pair_id: *const c_char,
    out_result_json: *mut *mut c_char,
) -> DdStatus {
    guard(|| {
        check_out(out_result_json, "out_result_json")?;
        let raw = str_arg(raw_text, "raw_text")?;
        let variant: PromptVariant = str_arg(variant, "variant")?.parse()?;
        let result = parse_output(raw, variant, str_arg(pair_id, "pair_id")?);
        put_string(out_result_json, to_json(&result)?)
    })
}

/// Replay-only client over a fixture directory.
///
/// # Safety
/// `fixtures_dir` must be NUL-terminated; `out_client` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_client_new_replay(fixtures_dir: *const c_char, out_client: *mut *mut DdClient) -> DdStatus {
    guard(|| {
        check_out(out_client, "out_client")?;
        let dir = str_arg(fixtures_dir, "fixtures_dir")?;
        let client = DdClient {
            inner: ChatClient::replay(FixtureStore::new(dir)),
        };
        *out_client = Box::into_raw(Box::new(client));
        Ok(())
    })
}

/// Client configured like the CLI: `transport` is live, record or replay;
/// live and record read `DOCDRIFT_API_BASE` and `DOCDRIFT_API_KEY`.
/// `fixtures_dir` may be NULL for live.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out_client` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_client_new_from_env(
    transport: *const c_char,
    fixtures_dir: *const c_char,
    out_client: *mut *mut DdClient,
) -> DdStatus {
    guard(|| {
        check_out(out_client, "out_client")?;
        let mode: TransportMode = str_arg(transport, "transport")?.parse()?;
        let dir = opt_str_arg(fixtures_dir, "fixtures_dir")?.map(Into::into);
        let inner = ChatClient::from_env(mode, dir).map_err(|e| Failure::new(DdStatus::Config, e.to_string()))?;
        *out_client = Box::into_raw(Box::new(DdClient { inner }));
        Ok(())
    })
}

/// # Safety
/// `client` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn dd_client_free(client: *mut DdClient) {
    if !client.is_null() {
        drop(Box::from_raw(client));
    }
}

/// Runs detection over a JSON array of pairs and writes a JSON array of
/// results in the same order.
///
/// # Safety
/// `client` must be a live handle; strings NUL-terminated; `out` writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn dd_detect(
    client: *const DdClient,
    pairs_json: *const c_char,
    variant: *const c_char,
    project_name: *const c_char,
    project_kind: *const c_char,
    model: *const c_char,
    concurrency: usize,
    out_results_json: *mut *mut c_char,
) -> DdStatus {
    guard(|| {
        check_out(out_results_json, "out_results_json")?;
        let client = client
            .as_ref()
            .ok_or_else(|| Failure::new(DdStatus::NullArgument, "client is null"))?;
        let pairs: Vec<CodeDocPair> = json_arg(str_arg(pairs_json, "pairs_json")?, "pairs_json")?;
        let kind: ProjectKind = str_arg(project_kind, "project_kind")?.parse()?;
        let config = DetectConfig {
            variant: str_arg(variant, "variant")?.parse()?,
            project: ProjectMeta::new(str_arg(project_name, "project_name")?, kind),
            model: str_arg(model, "model")?.to_string(),
            concurrency: concurrency.max(1),
        };
        let results = detect(&pairs, &config, &client.inner)?;
        put_string(out_results_json, to_json(&results)?)
    })
}

/// Renders the HTML report. `model` may be NULL.
///
/// # Safety
/// Strings must be NULL (where allowed) or NUL-terminated; `out_html`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dd_render_report(
    results_json: *const c_char,
    pairs_json: *const c_char,
    model: *const c_char,
    out_html: *mut *mut c_char,
) -> DdStatus {
    guard(|| {
        check_out(out_html, "out_html")?;
        let results: Vec<DetectionResult> = json_arg(str_arg(results_json, "results_json")?, "results_json")?;
        let pairs: Vec<CodeDocPair> = json_arg(str_arg(pairs_json, "pairs_json")?, "pairs_json")?;
        let header = ReportHeader {
            model: opt_str_arg(model, "model")?.unwrap_or("unspecified").to_string(),
        };
        put_string(out_html, render_report(&results, &pairs, &header)?)
    })
}

/// The summary.json text for a results array.
///
/// # Safety
/// `results_json` must be NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_summary(results_json: *const c_char, out_json: *mut *mut c_char) -> DdStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let results: Vec<DetectionResult> = json_arg(str_arg(results_json, "results_json")?, "results_json")?;
        put_string(out_json, write_summary(&results))
    })
}

/// Scores results against labels. Either label array may be NULL, not
/// both. Label arrays hold the same records as the CLI label files.
///
/// # Safety
/// Strings must be NULL (where allowed) or NUL-terminated; `out_metrics`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dd_metrics_compute(
    results_json: *const c_char,
    labels_json: *const c_char,
    finding_labels_json: *const c_char,
    out_metrics: *mut *mut DdMetrics,
) -> DdStatus {
    guard(|| {
        check_out(out_metrics, "out_metrics")?;
        let results: Vec<DetectionResult> = json_arg(str_arg(results_json, "results_json")?, "results_json")?;
        let labels: Option<Vec<GroundTruthLabel>> = opt_str_arg(labels_json, "labels_json")?
            .map(|t| json_arg(t, "labels_json"))
            .transpose()?;
        let finding_labels: Option<Vec<FindingLabel>> = opt_str_arg(finding_labels_json, "finding_labels_json")?
            .map(|t| json_arg(t, "finding_labels_json"))
            .transpose()?;
        if labels.is_none() && finding_labels.is_none() {
            return Err(Failure::new(DdStatus::Config, "no labels given"));
        }
        let summary = docdrift::cli::evaluate(&results, labels.as_deref(), finding_labels.as_deref())?;
        *out_metrics = Box::into_raw(Box::new(DdMetrics { summary }));
        Ok(())
    })
}

/// Copies the function-level metrics. Fails with `DD_STATUS_LABEL` when
/// they were not computed (no ground-truth labels).
///
/// # Safety
/// `metrics` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_metrics_function(metrics: *const DdMetrics, out: *mut DdFunctionMetrics) -> DdStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = metrics
            .as_ref()
            .ok_or_else(|| Failure::new(DdStatus::NullArgument, "metrics is null"))?;
        let f = m
            .summary
            .function
            .as_ref()
            .ok_or_else(|| Failure::new(DdStatus::Label, "function-level metrics need ground-truth labels"))?;
        *out = DdFunctionMetrics {
            tp: f.tp,
            fp: f.fp,
            tn: f.tn,
            fn_: f.fn_,
            flag_rate: rate(f.flag_rate),
            precision: rate(f.precision),
            recall: rate(f.recall),
            accuracy: rate(f.accuracy),
            f1: rate(f.f1),
        };
        Ok(())
    })
}

/// Copies the inconsistency-level metrics. Fails with `DD_STATUS_LABEL`
/// when they were not computed (no finding labels).
///
/// # Safety
/// `metrics` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_metrics_inconsistency(
    metrics: *const DdMetrics,
    out: *mut DdInconsistencyMetrics,
) -> DdStatus {
    guard(|| {
        check_out(out, "out")?;
        let m = metrics
            .as_ref()
            .ok_or_else(|| Failure::new(DdStatus::NullArgument, "metrics is null"))?;
        let i = m
            .summary
            .inconsistency
            .as_ref()
            .ok_or_else(|| Failure::new(DdStatus::Label, "inconsistency-level metrics need finding labels"))?;
        *out = DdInconsistencyMetrics {
            findings: i.findings,
            tp: i.inconsistency_tp,
            fp: i.inconsistency_fp,
            precision: rate(i.inconsistency_precision),
            under_promise: i.under_promise,
            under_promise_rate: rate(i.under_promise_rate),
        };
        Ok(())
    })
}

/// The metrics as the JSON `docdrift eval --json` prints.
///
/// # Safety
/// `metrics` must be a live handle; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn dd_metrics_to_json(metrics: *const DdMetrics, out_json: *mut *mut c_char) -> DdStatus {
    guard(|| {
        check_out(out_json, "out_json")?;
        let m = metrics
            .as_ref()
            .ok_or_else(|| Failure::new(DdStatus::NullArgument, "metrics is null"))?;
        put_string(out_json, m.summary.to_json())
    })
}

/// # Safety
/// `metrics` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn dd_metrics_free(metrics: *mut DdMetrics) {
    if !metrics.is_null() {
        drop(Box::from_raw(metrics));
    }
}

/// Cohen's kappa for a 2x2 table: rows rater A, columns rater B, both
/// ordered (consistent, inconsistent).
///
/// # Safety
/// `out_kappa` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dd_kappa_from_table(a: usize, b: usize, c: usize, d: usize, out_kappa: *mut f64) -> DdStatus {
    guard(|| {
        check_out(out_kappa, "out_kappa")?;
        *out_kappa = kappa_from_table(a, b, c, d)?;
        Ok(())
    })
}
