//! Function/documentation pair extraction and corpus filtering.
//!
//! Sources are parsed with tree-sitter. A pair is produced for every
//! function-like definition that carries its own documentation: a Python
//! docstring, or a `/** ... */` block (C++ also: a run of `///` lines)
//! directly above a TypeScript, Java or C++ definition. Only whitespace and
//! decorators may sit between the comment and the definition.

mod braced;
mod doc;
mod python;

use std::collections::HashSet;
use std::fmt;
use std::num::NonZeroUsize;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tree_sitter::{Node, Parser};
use walkdir::WalkDir;

use crate::error::{Error, Result};

pub use doc::{clean_block_comment, clean_docstring, clean_line_comments, cleandoc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceLanguage {
    Python,
    TypeScript,
    Cpp,
    Java,
}

impl SourceLanguage {
    pub const ALL: [SourceLanguage; 4] = [
        SourceLanguage::Python,
        SourceLanguage::TypeScript,
        SourceLanguage::Cpp,
        SourceLanguage::Java,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceLanguage::Python => "python",
            SourceLanguage::TypeScript => "typescript",
            SourceLanguage::Cpp => "cpp",
            SourceLanguage::Java => "java",
        }
    }

    /// Conventional file extensions, lowercase and without the dot.
    pub fn extensions(self) -> &'static [&'static str] {
        match self {
            SourceLanguage::Python => &["py"],
            SourceLanguage::TypeScript => &["ts", "tsx", "mts", "cts"],
            SourceLanguage::Cpp => &["cpp", "cc", "cxx", "c++", "hpp", "hh", "hxx", "h"],
            SourceLanguage::Java => &["java"],
        }
    }

    pub fn matches_path(self, path: &Path) -> bool {
        path.extension()
            .and_then(|e| e.to_str())
            .map(|e| self.extensions().contains(&e.to_ascii_lowercase().as_str()))
            .unwrap_or(false)
    }

    fn grammar(self, file_path: &str) -> tree_sitter::Language {
        match self {
            SourceLanguage::Python => tree_sitter_python::LANGUAGE.into(),
            SourceLanguage::TypeScript if file_path.to_ascii_lowercase().ends_with(".tsx") => {
                tree_sitter_typescript::LANGUAGE_TSX.into()
            }
            SourceLanguage::TypeScript => tree_sitter_typescript::LANGUAGE_TYPESCRIPT.into(),
            SourceLanguage::Cpp => tree_sitter_cpp::LANGUAGE.into(),
            SourceLanguage::Java => tree_sitter_java::LANGUAGE.into(),
        }
    }
}

impl fmt::Display for SourceLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceLanguage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "python" | "py" => Ok(SourceLanguage::Python),
            "typescript" | "ts" => Ok(SourceLanguage::TypeScript),
            "cpp" | "c++" => Ok(SourceLanguage::Cpp),
            "java" => Ok(SourceLanguage::Java),
            other => Err(Error::Config(format!(
                "unknown language {other:?} (expected python, typescript, cpp or java)"
            ))),
        }
    }
}

/// One function together with its method-level documentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDocPair {
    pub pair_id: String,
    pub project: String,
    pub language: SourceLanguage,
    pub file_path: String,
    pub function_name: String,
    pub doc_text: String,
    pub code_text: String,
    pub doc_span: (usize, usize),
    pub code_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_tokens: usize,
    pub dedupe: bool,
    pub sample_size: Option<NonZeroUsize>,
    pub sample_seed: Option<u64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_tokens: 7,
            dedupe: true,
            sample_size: None,
            sample_seed: None,
        }
    }
}

impl FilterConfig {
    /// No token threshold, no dedupe, no sampling.
    pub fn none() -> Self {
        FilterConfig {
            min_tokens: 0,
            dedupe: false,
            sample_size: None,
            sample_seed: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterStats {
    pub input: usize,
    pub below_min_tokens: usize,
    pub duplicates: usize,
    pub sampled_out: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedFile {
    pub path: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScanDiagnostics {
    pub files_scanned: usize,
    pub files_skipped: Vec<SkippedFile>,
    /// Per-construct notes (parse failures inside one definition and so on).
    pub notes: Vec<String>,
    pub extracted: usize,
    pub filter: FilterStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanReport {
    pub pairs: Vec<CodeDocPair>,
    pub diagnostics: ScanDiagnostics,
}

/// Result of extracting one file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FileExtraction {
    pub pairs: Vec<CodeDocPair>,
    pub diagnostics: Vec<String>,
}

pub(crate) struct RawPair {
    function_name: String,
    doc_text: String,
    code_text: String,
    doc_span: (usize, usize),
    code_span: (usize, usize),
}

pub(crate) fn walk_preorder<'t>(root: Node<'t>, mut visit: impl FnMut(Node<'t>)) {
    let mut cursor = root.walk();
    loop {
        visit(cursor.node());
        if cursor.goto_first_child() {
            continue;
        }
        loop {
            if cursor.goto_next_sibling() {
                break;
            }
            if !cursor.goto_parent() {
                return;
            }
        }
    }
}

/// Number of maximal runs of non-whitespace characters.
pub fn count_tokens(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Extracts every documented function in one source file, in source order.
///
/// Pairs come back with an empty `project` and a file-local provisional
/// `pair_id` of the form `<file_path>#<n>`; [`scan_corpus`] assigns the final
/// `<project>-<n>` identifiers.
pub fn extract_pairs_from_source(source_text: &str, language: SourceLanguage, file_path: &str) -> FileExtraction {
    let mut parser = Parser::new();
    if let Err(e) = parser.set_language(&language.grammar(file_path)) {
        return FileExtraction {
            pairs: Vec::new(),
            diagnostics: vec![format!("{file_path}: grammar unavailable: {e}")],
        };
    }
    let Some(tree) = parser.parse(source_text, None) else {
        return FileExtraction {
            pairs: Vec::new(),
            diagnostics: vec![format!("{file_path}: parser gave up")],
        };
    };
    let root = tree.root_node();
    let mut raw = Vec::new();
    let mut notes = Vec::new();
    if root.kind() == "ERROR" {
        notes.push(format!("does not parse as {language}; only intact functions are kept"));
    }
    match language {
        SourceLanguage::Python => python::collect(root, source_text, &mut raw, &mut notes),
        _ => braced::collect(root, source_text, language, &mut raw, &mut notes),
    }
    raw.sort_by_key(|p| p.code_span.0);

    let pairs = raw
        .into_iter()
        .enumerate()
        .map(|(i, r)| CodeDocPair {
            pair_id: format!("{file_path}#{}", i + 1),
            project: String::new(),
            language,
            file_path: file_path.to_string(),
            function_name: r.function_name,
            doc_text: r.doc_text,
            code_text: r.code_text,
            doc_span: r.doc_span,
            code_span: r.code_span,
        })
        .collect();
    FileExtraction {
        pairs,
        diagnostics: notes
            .into_iter()
            .map(|n| format!("{file_path}: {n}"))
            .collect(),
    }
}

/// Re-derives `(doc_text, code_text)` from the original file contents and
/// the pair's spans.
pub fn reconstruct(pair: &CodeDocPair, source: &str) -> Option<(String, String)> {
    let doc_slice = source.get(pair.doc_span.0..pair.doc_span.1)?;
    let code_slice = source.get(pair.code_span.0..pair.code_span.1)?;
    Some(match pair.language {
        SourceLanguage::Python => (
            clean_docstring(doc_slice)?,
            python::code_without_docstring(source, pair.code_span, pair.doc_span),
        ),
        _ if doc_slice.starts_with("/**") => (clean_block_comment(doc_slice), code_slice.to_string()),
        _ => (clean_line_comments(doc_slice), code_slice.to_string()),
    })
}

/// Token threshold and duplicate removal, keeping the original order.
pub fn apply_filters(pairs: Vec<CodeDocPair>, filters: &FilterConfig) -> Vec<CodeDocPair> {
    filter_with_stats(pairs, filters).0
}

fn filter_with_stats(pairs: Vec<CodeDocPair>, filters: &FilterConfig) -> (Vec<CodeDocPair>, FilterStats) {
    let mut stats = FilterStats {
        input: pairs.len(),
        ..FilterStats::default()
    };
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut kept = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if count_tokens(&pair.doc_text) <= filters.min_tokens
            || count_tokens(&pair.code_text) <= filters.min_tokens
        {
            stats.below_min_tokens += 1;
            continue;
        }
        if filters.dedupe && !seen.insert((pair.doc_text.clone(), pair.code_text.clone())) {
            stats.duplicates += 1;
            continue;
        }
        kept.push(pair);
    }
    (kept, stats)
}

/// Uniform sample of `size` pairs (all of them when fewer exist), keeping
/// the original relative order. Seed 0 is used when none is given.
pub fn sample_pairs(pairs: Vec<CodeDocPair>, size: NonZeroUsize, seed: Option<u64>) -> Vec<CodeDocPair> {
    let size = size.get();
    if pairs.len() <= size {
        return pairs;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let mut chosen = rand::seq::index::sample(&mut rng, pairs.len(), size).into_vec();
    chosen.sort_unstable();
    let mut chosen = chosen.into_iter().peekable();
    pairs
        .into_iter()
        .enumerate()
        .filter_map(|(i, p)| {
            if chosen.peek() == Some(&i) {
                chosen.next();
                Some(p)
            } else {
                None
            }
        })
        .collect()
}

/// Walks `root_path`, extracts pairs from every file with one of the
/// language's extensions (visited in sorted path order), assigns
/// `<project>-<n>` identifiers in extraction order, then filters and
/// optionally samples.
pub fn scan_corpus(
    root_path: &Path,
    project: &str,
    language: SourceLanguage,
    filters: &FilterConfig,
) -> Result<ScanReport> {
    let meta = std::fs::metadata(root_path).map_err(|e| Error::Corpus {
        path: root_path.to_path_buf(),
        message: e.to_string(),
    })?;
    if !meta.is_dir() {
        return Err(Error::Corpus {
            path: root_path.to_path_buf(),
            message: "not a directory".into(),
        });
    }
    std::fs::read_dir(root_path).map_err(|e| Error::Corpus {
        path: root_path.to_path_buf(),
        message: e.to_string(),
    })?;

    let mut diagnostics = ScanDiagnostics::default();
    let mut pairs = Vec::new();
    for entry in WalkDir::new(root_path).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                diagnostics.files_skipped.push(SkippedFile {
                    path: e.path().map(|p| p.display().to_string()).unwrap_or_default(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() || !language.matches_path(entry.path()) {
            continue;
        }
        let rel = relative_path(root_path, entry.path());
        let bytes = match std::fs::read(entry.path()) {
            Ok(b) => b,
            Err(e) => {
                diagnostics.files_skipped.push(SkippedFile {
                    path: rel,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let Ok(text) = String::from_utf8(bytes) else {
            diagnostics.files_skipped.push(SkippedFile {
                path: rel,
                reason: "not valid UTF-8".into(),
            });
            continue;
        };
        diagnostics.files_scanned += 1;
        let file = extract_pairs_from_source(&text, language, &rel);
        diagnostics.notes.extend(file.diagnostics);
        pairs.extend(file.pairs);
    }

    for (i, pair) in pairs.iter_mut().enumerate() {
        pair.project = project.to_string();
        pair.pair_id = format!("{project}-{}", i + 1);
    }
    diagnostics.extracted = pairs.len();

    let (mut pairs, mut stats) = filter_with_stats(pairs, filters);
    if let Some(size) = filters.sample_size {
        let before = pairs.len();
        pairs = sample_pairs(pairs, size, filters.sample_seed);
        stats.sampled_out = before - pairs.len();
    }
    diagnostics.filter = stats;
    Ok(ScanReport { pairs, diagnostics })
}

fn relative_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}
