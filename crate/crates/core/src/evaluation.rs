//! Scoring detection results against human labels.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{normalize_key, DetectionResult};
use crate::category::Category;
use crate::error::{Error, Result};
use crate::extraction::CodeDocPair;
use crate::llm_client::ChatClient;
use crate::pipeline::{detect, DetectConfig};
use crate::prompting::{ProjectMeta, PromptVariant};
use crate::rates::{percent, ratio, serialize_rate};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthLabel {
    pub pair_id: String,
    pub consistent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Judgment {
    Tp,
    Fp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FindingLabel {
    pub finding_id: String,
    pub judgment: Judgment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    #[serde(serialize_with = "serialize_rate")]
    pub flag_rate: Option<f64>,
    #[serde(serialize_with = "serialize_rate")]
    pub precision: Option<f64>,
    #[serde(serialize_with = "serialize_rate")]
    pub recall: Option<f64>,
    #[serde(serialize_with = "serialize_rate")]
    pub accuracy: Option<f64>,
    #[serde(serialize_with = "serialize_rate")]
    pub f1: Option<f64>,
}

impl FunctionMetrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let total = tp + fp + tn + fn_;
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        FunctionMetrics {
            tp,
            fp,
            tn,
            fn_,
            flag_rate: ratio(tp + fp, total),
            precision,
            recall,
            accuracy: ratio(tp + tn, total),
            f1,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionEvaluation {
    pub metrics: FunctionMetrics,
    /// Results with no ground-truth label; excluded from the counts.
    pub unmatched: Vec<String>,
}

fn index_unique<'a, T>(items: &'a [T], id: impl Fn(&T) -> &str, what: &str) -> Result<HashMap<&'a str, &'a T>> {
    let mut map = HashMap::with_capacity(items.len());
    for item in items {
        if map.insert(id(item), item).is_some() {
            return Err(Error::Label(format!("duplicate {what} label for {}", id(item))));
        }
    }
    Ok(map)
}

pub fn compute_function_metrics(
    results: &[DetectionResult],
    labels: &[GroundTruthLabel],
) -> Result<FunctionEvaluation> {
    let by_id = index_unique(labels, |l| &l.pair_id, "pair")?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    let mut unmatched = Vec::new();
    for r in results {
        let Some(label) = by_id.get(r.pair_id.as_str()) else {
            unmatched.push(r.pair_id.clone());
            continue;
        };
        match (r.is_flagged(), label.consistent) {
            (true, false) => tp += 1,
            (true, true) => fp += 1,
            (false, true) => tn += 1,
            (false, false) => fn_ += 1,
        }
    }
    Ok(FunctionEvaluation {
        metrics: FunctionMetrics::from_counts(tp, fp, tn, fn_),
        unmatched,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InconsistencyMetrics {
    pub findings: usize,
    pub inconsistency_tp: usize,
    pub inconsistency_fp: usize,
    #[serde(serialize_with = "serialize_rate")]
    pub inconsistency_precision: Option<f64>,
    pub under_promise: usize,
    #[serde(serialize_with = "serialize_rate")]
    pub under_promise_rate: Option<f64>,
}

impl InconsistencyMetrics {
    pub fn from_counts(tp: usize, fp: usize, under_promise: usize) -> Self {
        let findings = tp + fp;
        InconsistencyMetrics {
            findings,
            inconsistency_tp: tp,
            inconsistency_fp: fp,
            inconsistency_precision: ratio(tp, findings),
            under_promise,
            under_promise_rate: ratio(under_promise, findings),
        }
    }
}

/// Whether a free-text label note marks the finding as an under-promise.
fn note_says_under_promise(note: &str) -> bool {
    let n = normalize_key(note);
    n.contains("under_promise") || n.contains("underpromise")
}

/// Scores every post-filter finding. Each one must have a label.
pub fn compute_inconsistency_metrics(
    results: &[DetectionResult],
    finding_labels: &[FindingLabel],
) -> Result<InconsistencyMetrics> {
    let by_id = index_unique(finding_labels, |l| &l.finding_id, "finding")?;
    let mut missing = Vec::new();
    let (mut tp, mut fp, mut under) = (0, 0, 0);
    for f in results.iter().flat_map(|r| &r.findings) {
        let Some(label) = by_id.get(f.finding_id.as_str()) else {
            missing.push(f.finding_id.clone());
            continue;
        };
        match label.judgment {
            Judgment::Tp => tp += 1,
            Judgment::Fp => fp += 1,
        }
        if f.category == Category::UnderPromise || label.category_note.as_deref().is_some_and(note_says_under_promise) {
            under += 1;
        }
    }
    if !missing.is_empty() {
        return Err(Error::Evaluation(format!(
            "{} finding(s) have no label: {}",
            missing.len(),
            missing.join(", ")
        )));
    }
    Ok(InconsistencyMetrics::from_counts(tp, fp, under))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inconsistency: Option<InconsistencyMetrics>,
}

impl MetricsSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }

    /// Two-decimal listing for terminals.
    pub fn to_text(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
        let mut out = String::new();
        if let Some(m) = &self.function {
            let _ = writeln!(out, "function level: tp={} fp={} tn={} fn={}", m.tp, m.fp, m.tn, m.fn_);
            let _ = writeln!(out, "  flag rate  {}", percent(m.flag_rate));
            let _ = writeln!(out, "  precision  {}", fmt(m.precision));
            let _ = writeln!(out, "  recall     {}", fmt(m.recall));
            let _ = writeln!(out, "  accuracy   {}", fmt(m.accuracy));
            let _ = writeln!(out, "  f1         {}", fmt(m.f1));
        }
        if let Some(m) = &self.inconsistency {
            let _ = writeln!(
                out,
                "inconsistency level: findings={} tp={} fp={}",
                m.findings, m.inconsistency_tp, m.inconsistency_fp
            );
            let _ = writeln!(out, "  precision            {}", fmt(m.inconsistency_precision));
            let _ = writeln!(out, "  under-promise rate   {}", percent(m.under_promise_rate));
        }
        out
    }
}

/// Cohen's kappa for a 2x2 agreement table. Rows are rater A
/// (consistent, inconsistent), columns rater B in the same order.
pub fn kappa_from_table(a: usize, b: usize, c: usize, d: usize) -> Result<f64> {
    let n = (a + b + c + d) as f64;
    if n == 0.0 {
        return Err(Error::Evaluation("kappa needs at least one pair".into()));
    }
    let p_o = (a + d) as f64 / n;
    let p_e = ((a + b) as f64 * (a + c) as f64 + (c + d) as f64 * (b + d) as f64) / (n * n);
    if p_e >= 1.0 {
        // both raters used one class throughout, so they agree everywhere
        return Ok(1.0);
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Agreement between two raters' consistent/inconsistent labels.
pub fn cohens_kappa(labels_a: &[GroundTruthLabel], labels_b: &[GroundTruthLabel]) -> Result<f64> {
    let a = index_unique(labels_a, |l| &l.pair_id, "pair")?;
    let b = index_unique(labels_b, |l| &l.pair_id, "pair")?;
    let only_a: BTreeSet<&str> = a.keys().filter(|k| !b.contains_key(*k)).copied().collect();
    let only_b: BTreeSet<&str> = b.keys().filter(|k| !a.contains_key(*k)).copied().collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        return Err(Error::Evaluation(format!(
            "label files cover different pairs (only in first: {:?}; only in second: {:?})",
            only_a, only_b
        )));
    }
    let mut table = [[0usize; 2]; 2];
    for (id, la) in &a {
        let lb = b[id];
        table[usize::from(!la.consistent)][usize::from(!lb.consistent)] += 1;
    }
    kappa_from_table(table[0][0], table[0][1], table[1][0], table[1][1])
}

/// One variant's column in the ablation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationColumn {
    pub variant: PromptVariant,
    pub pairs: usize,
    pub flagged: usize,
    pub malformed: usize,
    #[serde(serialize_with = "serialize_rate")]
    pub flag_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionMetrics>,
    #[serde(skip)]
    pub results: Vec<DetectionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub columns: Vec<AblationColumn>,
}

impl AblationTable {
    pub fn column(&self, variant: PromptVariant) -> Option<&AblationColumn> {
        self.columns.iter().find(|c| c.variant == variant)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ablation table serializes");
        s.push('\n');
        s
    }

    /// Metrics as rows, variants as columns, rates in whole percent.
    pub fn to_text(&self) -> String {
        let row = |name: &str, cell: &dyn Fn(&AblationColumn) -> String| -> Vec<String> {
            std::iter::once(name.to_string())
                .chain(self.columns.iter().map(cell))
                .collect()
        };
        let count = |c: &AblationColumn, f: fn(&FunctionMetrics) -> usize| {
            c.function.as_ref().map_or_else(|| "-".to_string(), |m| f(m).to_string())
        };
        let rate = |c: &AblationColumn, f: fn(&FunctionMetrics) -> Option<f64>| percent(c.function.as_ref().and_then(f));

        let mut grid = vec![
            row("Metric", &|c| c.variant.to_string()),
            row("Pairs", &|c| c.pairs.to_string()),
            row("Flagged", &|c| c.flagged.to_string()),
            row("Malformed", &|c| c.malformed.to_string()),
            row("Flag rate", &|c| percent(c.flag_rate)),
        ];
        if self.columns.iter().any(|c| c.function.is_some()) {
            grid.extend([
                row("TP", &|c| count(c, |m| m.tp)),
                row("FP", &|c| count(c, |m| m.fp)),
                row("TN", &|c| count(c, |m| m.tn)),
                row("FN", &|c| count(c, |m| m.fn_)),
                row("Precision", &|c| rate(c, |m| m.precision)),
                row("Recall", &|c| rate(c, |m| m.recall)),
                row("Accuracy", &|c| rate(c, |m| m.accuracy)),
                row("F1", &|c| rate(c, |m| m.f1)),
            ]);
        }

        let widths: Vec<usize> = (0..grid[0].len())
            .map(|i| grid.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in &grid {
            let mut line = format!("{:<w$}", r[0], w = widths[0]);
            for (cell, w) in r.iter().zip(&widths).skip(1) {
                let _ = write!(line, "  {cell:>w$}");
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AblationConfig {
    pub project: ProjectMeta,
    pub model: String,
    pub concurrency: usize,
}

/// Runs detection once per variant over the same pairs and tabulates the
/// outcome. Function-level metrics are added when labels are given.
pub fn ablate(
    pairs: &[CodeDocPair],
    variants: &[PromptVariant],
    client: &ChatClient,
    config: &AblationConfig,
    labels: Option<&[GroundTruthLabel]>,
) -> Result<AblationTable> {
    if variants.is_empty() {
        return Err(Error::Config("no variants requested".into()));
    }
    let mut columns = Vec::with_capacity(variants.len());
    for &variant in variants {
        let wrap = |source: Error| Error::Variant {
            variant,
            source: Box::new(source),
        };
        let detect_config = DetectConfig {
            variant,
            project: config.project.clone(),
            model: config.model.clone(),
            concurrency: config.concurrency,
        };
        let results = detect(pairs, &detect_config, client).map_err(wrap)?;
        let function = match labels {
            Some(labels) => Some(compute_function_metrics(&results, labels).map_err(wrap)?.metrics),
            None => None,
        };
        let t = crate::pipeline::tally(&results);
        columns.push(AblationColumn {
            variant,
            pairs: t.pairs,
            flagged: t.flagged,
            malformed: t.malformed,
            flag_rate: ratio(t.flagged, t.pairs),
            function,
            results,
        });
    }
    Ok(AblationTable { columns })
}
