//! HTML report and JSON run summary.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{DetectionResult, Finding, ParseStatus, Verdict};
use crate::category::Category;
use crate::error::{Error, Result};
use crate::extraction::CodeDocPair;
use crate::prompting::PromptVariant;
use crate::rates::{natural_cmp, ratio, serialize_rate};

pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    WhitespaceNormalized,
    Unlocated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetLocation {
    pub span: Option<(usize, usize)>,
    pub match_kind: MatchKind,
}

impl SnippetLocation {
    const UNLOCATED: SnippetLocation = SnippetLocation {
        span: None,
        match_kind: MatchKind::Unlocated,
    };
}

/// Finds `snippet` in `source`: first exact occurrence, else the first
/// occurrence once whitespace runs are collapsed on both sides.
pub fn locate_snippet(snippet: &str, source: &str) -> SnippetLocation {
    if snippet.trim().is_empty() {
        return SnippetLocation::UNLOCATED;
    }
    if let Some(start) = source.find(snippet) {
        return SnippetLocation {
            span: Some((start, start + snippet.len())),
            match_kind: MatchKind::Exact,
        };
    }
    let (needle, _) = collapse_whitespace(snippet.trim());
    let (haystack, origin) = collapse_whitespace(source);
    let Some(n_start) = haystack.find(&needle) else {
        return SnippetLocation::UNLOCATED;
    };
    let n_end = n_start + needle.len();
    let start = origin[n_start].0;
    let end = origin[n_end - 1].1;
    SnippetLocation {
        span: Some((start, end)),
        match_kind: MatchKind::WhitespaceNormalized,
    }
}

/// Whitespace runs become one space. For each output byte, the original
/// byte range it stands for.
fn collapse_whitespace(text: &str) -> (String, Vec<(usize, usize)>) {
    let mut out = String::with_capacity(text.len());
    let mut origin = Vec::with_capacity(text.len());
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if !d.is_whitespace() {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            out.push(' ');
            origin.push((i, end));
        } else {
            out.push(c);
            let end = i + c.len_utf8();
            origin.extend(std::iter::repeat_n((i, end), c.len_utf8()));
        }
    }
    (out, origin)
}

pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportHeader {
    pub model: String,
}

const STYLE: &str = "\
body{font-family:system-ui,sans-serif;margin:2em auto;max-width:72em;color:#222}
header{border-bottom:2px solid #444;margin-bottom:1.5em}
.pair{border:1px solid #bbb;border-radius:4px;padding:0 1em 1em;margin-bottom:2em}
.pair h2{font-size:1.1em}
.loc{color:#666;font-weight:normal;font-size:.9em}
.panes{display:grid;grid-template-columns:1fr 1fr;gap:1em}
pre{background:#f6f6f6;padding:.6em;overflow-x:auto;white-space:pre-wrap}
mark{background:#ffe08a}
mark.over_promise{background:#ffc9a8}
mark.direct_mismatch{background:#f7a8b8}
mark.under_promise{background:#c4e3b5}
.badge{display:inline-block;font-size:.8em;padding:0 .5em;border-radius:3px;background:#ddd;margin-right:.4em}
.badge.unlocated{background:#555;color:#fff}
.finding{margin-bottom:.8em}
.explanation{margin:.2em 0}
";

/// Marked regions of one text: `(start, end, category, finding numbers)`.
type Marks = Vec<(usize, usize, Category, Vec<usize>)>;

/// Splits overlapping spans into disjoint segments so each can be wrapped
/// in a single `<mark>`.
fn disjoint_marks(spans: &[(usize, usize, Category, usize)]) -> Marks {
    let mut cuts: BTreeSet<usize> = BTreeSet::new();
    for &(s, e, _, _) in spans {
        cuts.insert(s);
        cuts.insert(e);
    }
    let cuts: Vec<usize> = cuts.into_iter().collect();
    let mut marks: Marks = Vec::new();
    for w in cuts.windows(2) {
        let (s, e) = (w[0], w[1]);
        let covering: Vec<&(usize, usize, Category, usize)> =
            spans.iter().filter(|&&(a, b, _, _)| a <= s && e <= b).collect();
        let Some(first) = covering.first() else { continue };
        let numbers: Vec<usize> = covering.iter().map(|c| c.3).collect();
        match marks.last_mut() {
            Some(last) if last.1 == s && last.3 == numbers => last.1 = e,
            _ => marks.push((s, e, first.2, numbers)),
        }
    }
    marks
}

fn render_marked(text: &str, marks: &Marks) -> String {
    let mut out = String::new();
    let mut pos = 0;
    for (s, e, category, numbers) in marks {
        out.push_str(&escape_html(&text[pos..*s]));
        let refs: Vec<String> = numbers.iter().map(|n| n.to_string()).collect();
        let _ = write!(
            out,
            "<mark class=\"{}\" data-findings=\"{}\">{}</mark>",
            category.as_str(),
            refs.join(" "),
            escape_html(&text[*s..*e])
        );
        pos = *e;
    }
    out.push_str(&escape_html(&text[pos..]));
    out
}

fn render_pair(out: &mut String, pair: &CodeDocPair, findings: &[Finding]) {
    let mut doc_spans = Vec::new();
    let mut code_spans = Vec::new();
    let mut unlocated: Vec<Vec<(&str, &str)>> = vec![Vec::new(); findings.len()];
    for (i, f) in findings.iter().enumerate() {
        let n = i + 1;
        for (label, snippet, text, spans) in [
            ("documentation", &f.doc_snippet, &pair.doc_text, &mut doc_spans),
            ("code", &f.code_snippet, &pair.code_text, &mut code_spans),
        ] {
            let Some(snippet) = snippet else { continue };
            match locate_snippet(snippet, text).span {
                Some((s, e)) => spans.push((s, e, f.category, n)),
                None => unlocated[i].push((label, snippet.as_str())),
            }
        }
    }

    let _ = writeln!(
        out,
        "<section class=\"pair\" id=\"pair-{id}\">\n<h2>{id} <code>{name}</code> <span class=\"loc\">{path}</span></h2>",
        id = escape_html(&pair.pair_id),
        name = escape_html(&pair.function_name),
        path = escape_html(&pair.file_path),
    );
    let _ = writeln!(
        out,
        "<div class=\"panes\">\n<div><h3>Documentation</h3><pre class=\"doc\">{}</pre></div>\n<div><h3>Code</h3><pre class=\"code\">{}</pre></div>\n</div>",
        render_marked(&pair.doc_text, &disjoint_marks(&doc_spans)),
        render_marked(&pair.code_text, &disjoint_marks(&code_spans)),
    );
    out.push_str("<ol class=\"findings\">\n");
    for (f, missing) in findings.iter().zip(&unlocated) {
        let _ = writeln!(
            out,
            "<li class=\"finding\" id=\"{}\"><span class=\"badge {}\">{}</span>",
            escape_html(&f.finding_id),
            f.category.as_str(),
            f.category.label()
        );
        let _ = writeln!(out, "<p class=\"explanation\">{}</p>", escape_html(&f.explanation));
        for (label, snippet) in missing {
            let _ = writeln!(
                out,
                "<p class=\"snippet\"><span class=\"badge unlocated\">unlocated</span>{label}: <code>{}</code></p>",
                escape_html(snippet)
            );
        }
        out.push_str("</li>\n");
    }
    out.push_str("</ol>\n</section>\n");
}

fn variants_label(results: &[DetectionResult]) -> String {
    let variants: BTreeSet<PromptVariant> = results.iter().map(|r| r.variant).collect();
    if variants.is_empty() {
        return "-".into();
    }
    variants.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
}

fn sorted_results(results: &[DetectionResult]) -> Vec<&DetectionResult> {
    let mut sorted: Vec<&DetectionResult> = results.iter().collect();
    sorted.sort_by(|a, b| natural_cmp(&a.pair_id, &b.pair_id));
    sorted
}

/// Single self-contained HTML page. Flagged pairs get a section each,
/// ordered by pair id; consistent pairs are only counted.
pub fn render_report(results: &[DetectionResult], pairs: &[CodeDocPair], header: &ReportHeader) -> Result<String> {
    let by_id: HashMap<&str, &CodeDocPair> = pairs.iter().map(|p| (p.pair_id.as_str(), p)).collect();
    let sorted = sorted_results(results);
    for r in &sorted {
        if !by_id.contains_key(r.pair_id.as_str()) {
            return Err(Error::Report(format!("result for unknown pair {}", r.pair_id)));
        }
    }
    let t = crate::pipeline::tally(results);
    let flag_rate = ratio(t.flagged, t.pairs).map_or_else(|| "-".to_string(), |r| format!("{:.2}%", r * 100.0));

    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>docdrift report</title>\n<style>\n");
    out.push_str(STYLE);
    out.push_str("</style>\n</head>\n<body>\n<header>\n<h1>docdrift report</h1>\n");
    let _ = writeln!(
        out,
        "<p>variant <b>{}</b>, model <b>{}</b></p>",
        escape_html(&variants_label(results)),
        escape_html(&header.model)
    );
    let _ = writeln!(
        out,
        "<p><b class=\"flagged\">{} flagged</b> of {} pairs (flag rate {}), {} malformed output(s)</p>\n</header>",
        t.flagged, t.pairs, flag_rate, t.malformed
    );
    for r in sorted.iter().filter(|r| r.verdict == Verdict::Inconsistent) {
        render_pair(&mut out, by_id[r.pair_id.as_str()], &r.findings);
    }
    let _ = writeln!(
        out,
        "<details class=\"consistent\"><summary>{} consistent pair(s)</summary></details>",
        t.pairs - t.flagged
    );
    out.push_str("</body>\n</html>\n");
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub over_promise: usize,
    pub direct_mismatch: usize,
    pub under_promise: usize,
    pub uncategorized: usize,
}

impl CategoryCounts {
    fn of<'a>(findings: impl IntoIterator<Item = &'a Finding>) -> Self {
        let mut c = CategoryCounts::default();
        for f in findings {
            match f.category {
                Category::OverPromise => c.over_promise += 1,
                Category::DirectMismatch => c.direct_mismatch += 1,
                Category::UnderPromise => c.under_promise += 1,
                Category::Uncategorized => c.uncategorized += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.over_promise + self.direct_mismatch + self.under_promise + self.uncategorized
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTotals {
    pub pairs: usize,
    pub flagged: usize,
    pub malformed: usize,
    pub findings_prefilter: CategoryCounts,
    pub findings_postfilter: CategoryCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairIndexEntry {
    pub pair_id: String,
    pub verdict: Verdict,
    pub parse_status: ParseStatus,
    pub findings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub variants: Vec<PromptVariant>,
    pub totals: SummaryTotals,
    #[serde(serialize_with = "serialize_rate")]
    pub flag_rate: Option<f64>,
    /// Share of post-filter findings categorized as under-promise.
    #[serde(serialize_with = "serialize_rate")]
    pub under_promise_rate: Option<f64>,
    pub pairs: Vec<PairIndexEntry>,
}

pub fn summarize(results: &[DetectionResult]) -> RunSummary {
    let t = crate::pipeline::tally(results);
    let pre = CategoryCounts::of(results.iter().flat_map(|r| &r.prefilter_findings));
    let post = CategoryCounts::of(results.iter().flat_map(|r| &r.findings));
    let variants: BTreeSet<PromptVariant> = results.iter().map(|r| r.variant).collect();
    RunSummary {
        schema_version: SUMMARY_SCHEMA_VERSION,
        variants: variants.into_iter().collect(),
        flag_rate: ratio(t.flagged, t.pairs),
        under_promise_rate: ratio(post.under_promise, post.total()),
        totals: SummaryTotals {
            pairs: t.pairs,
            flagged: t.flagged,
            malformed: t.malformed,
            findings_prefilter: pre,
            findings_postfilter: post,
        },
        pairs: sorted_results(results)
            .into_iter()
            .map(|r| PairIndexEntry {
                pair_id: r.pair_id.clone(),
                verdict: r.verdict,
                parse_status: r.parse_status,
                findings: r.findings.len(),
            })
            .collect(),
    }
}

/// `summary.json` contents. Rates carry 4 decimals; empty denominators
/// serialize as `null`.
pub fn write_summary(results: &[DetectionResult]) -> String {
    let mut json = serde_json::to_string_pretty(&summarize(results)).expect("summary serializes");
    json.push('\n');
    json
}
