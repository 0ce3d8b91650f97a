//! The 20-pair end-to-end fixture: a small Python corpus, hand-written
//! model responses for DP and V1, and labels for both levels.

use std::collections::BTreeMap;
use std::path::PathBuf;

use docdrift::extraction::{scan_corpus, CodeDocPair, FilterConfig, SourceLanguage};
use docdrift::llm_client::{ChatClient, FixtureStore, ScriptedTransport, TransportMode};
use docdrift::pipeline::{detect, DetectConfig};
use docdrift::prompting::{build_user_prompt, ProjectKind, ProjectMeta, PromptVariant};

pub const MODEL: &str = "fixture-model";
pub const PROJECT: &str = "e2e";
pub const PAIRS: usize = 20;

pub fn dir() -> PathBuf {
    super::fixtures_dir().join("e2e")
}

pub fn corpus() -> PathBuf {
    dir().join("corpus")
}

pub fn fixture_store_dir() -> PathBuf {
    dir().join("fixtures")
}

pub fn labels_path() -> PathBuf {
    dir().join("labels.jsonl")
}

pub fn finding_labels_path() -> PathBuf {
    dir().join("finding_labels.jsonl")
}

pub fn project() -> ProjectMeta {
    ProjectMeta::new(PROJECT, ProjectKind::Library)
}

pub fn pairs() -> Vec<CodeDocPair> {
    scan_corpus(&corpus(), PROJECT, SourceLanguage::Python, &FilterConfig::default())
        .unwrap()
        .pairs
}

/// `pair_id -> variant -> raw model text`, as authored.
pub fn responses() -> BTreeMap<String, BTreeMap<String, String>> {
    let text = std::fs::read_to_string(dir().join("responses.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub const VARIANTS: [PromptVariant; 2] = [PromptVariant::Dp, PromptVariant::V1];

/// A transport answering each pair's user prompt with the authored text.
pub fn scripted(variant: PromptVariant, pairs: &[CodeDocPair]) -> ScriptedTransport {
    let responses = responses();
    let mut t = ScriptedTransport::new();
    for p in pairs {
        let raw = &responses[&p.pair_id][variant.as_str()];
        t.insert(build_user_prompt(p), raw.clone());
    }
    t
}

pub fn config(variant: PromptVariant) -> DetectConfig {
    DetectConfig {
        variant,
        project: project(),
        model: MODEL.into(),
        concurrency: 4,
    }
}

/// Records every authored response into `store_dir` through the normal
/// record path.
pub fn record_into(store_dir: &std::path::Path) {
    let pairs = pairs();
    for v in VARIANTS {
        let client = ChatClient::with_transport(
            TransportMode::Record,
            Box::new(scripted(v, &pairs)),
            Some(FixtureStore::new(store_dir)),
        )
        .unwrap();
        detect(&pairs, &config(v), &client).unwrap();
    }
}

pub fn replay_client() -> ChatClient {
    ChatClient::replay(FixtureStore::new(fixture_store_dir()))
}

pub fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

/// Runs the CLI in process: `(exit code, stdout, stderr)`.
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = docdrift::cli::run(std::iter::once("docdrift").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// extract, detect, report and eval into `out`; returns the eval JSON.
pub fn full_run(out: &std::path::Path) -> String {
    let fixtures = fixture_store_dir();
    let (code, _, err) = cli(&[
        "extract",
        s(&corpus()),
        "--out",
        s(out),
        "--language",
        "python",
        "--project-name",
        PROJECT,
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, stdout, err) = cli(&[
        "detect",
        "--out",
        s(out),
        "--project-kind",
        "library",
        "--model",
        MODEL,
        "--fixtures",
        s(&fixtures),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("(4 flagged, 1 malformed)"), "{stdout}");
    let (code, _, err) = cli(&["report", "--out", s(out), "--model", MODEL]);
    assert_eq!(code, 0, "{err}");
    let (code, metrics, err) = cli(&[
        "eval",
        "--out",
        s(out),
        "--labels",
        s(&labels_path()),
        "--finding-labels",
        s(&finding_labels_path()),
        "--json",
    ]);
    assert_eq!(code, 0, "{err}");
    metrics
}
