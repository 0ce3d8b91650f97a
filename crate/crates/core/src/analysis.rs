//! Turning raw model text into categorized findings.
//!
//! [`parse_output`] is total. Anything that cannot be read against the
//! variant's schema becomes a `malformed` result with a `consistent`
//! verdict and no findings.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::category::Category;
use crate::prompting::{keys, schema_for_variant, KeyKind, KeySpec, PromptVariant, SchemaSpec, YesNo};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub finding_id: String,
    pub category: Category,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_snippet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_snippet: Option<String>,
    pub explanation: String,
    pub source_key: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseStatus {
    Ok,
    Malformed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub pair_id: String,
    pub variant: PromptVariant,
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
    pub prefilter_findings: Vec<Finding>,
    pub parse_status: ParseStatus,
    pub raw_text: String,
    #[serde(default)]
    pub doc_summary: Option<String>,
    #[serde(default)]
    pub code_summary: Option<String>,
}

impl DetectionResult {
    pub fn malformed(raw_text: &str, variant: PromptVariant, pair_id: &str) -> Self {
        DetectionResult {
            pair_id: pair_id.to_string(),
            variant,
            verdict: Verdict::Consistent,
            findings: Vec::new(),
            prefilter_findings: Vec::new(),
            parse_status: ParseStatus::Malformed,
            raw_text: raw_text.to_string(),
            doc_summary: None,
            code_summary: None,
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.verdict == Verdict::Inconsistent
    }
}

/// Removes every under-promise finding, keeping the rest in order.
pub fn apply_external_filter(findings: &[Finding]) -> Vec<Finding> {
    findings
        .iter()
        .filter(|f| f.category != Category::UnderPromise)
        .cloned()
        .collect()
}

/// Lowercase, collapse whitespace/`-`/`_` runs to one `_`, drop a trailing `?`.
pub fn normalize_key(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    let mut in_sep = false;
    let key = key.trim();
    let key = key.strip_suffix('?').unwrap_or(key).trim_end();
    for c in key.chars() {
        if c.is_whitespace() || c == '-' || c == '_' {
            if !in_sep {
                out.push('_');
                in_sep = true;
            }
        } else {
            in_sep = false;
            out.extend(c.to_lowercase());
        }
    }
    out
}

/// First balanced `{...}` region that parses as a JSON object, after
/// dropping markdown code-fence lines.
pub fn extract_json_block(raw_text: &str) -> Option<String> {
    let text: String = raw_text
        .lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect::<Vec<_>>()
        .join("\n");
    let bytes = text.as_bytes();
    for (start, &b) in bytes.iter().enumerate() {
        if b != b'{' {
            continue;
        }
        let Some(end) = balanced_end(bytes, start) else {
            continue;
        };
        let candidate = &text[start..end];
        if let Ok(Value::Object(_)) = serde_json::from_str::<Value>(candidate) {
            return Some(candidate.to_string());
        }
    }
    None
}

/// Byte index one past the brace closing the one at `start`, skipping
/// braces inside JSON strings.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// Text the models use to say "nothing here".
fn is_emptyish_str(s: &str) -> bool {
    let t = s.trim().trim_matches(|c: char| c == '.' || c == '"' || c == '\'').trim();
    t.is_empty()
        || ["none", "null", "n/a", "na", "nil", "[]", "{}", "no inconsistency", "no inconsistencies"]
            .iter()
            .any(|w| t.eq_ignore_ascii_case(w))
}

fn is_emptyish(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::String(s) => is_emptyish_str(s),
        Value::Array(a) => a.iter().all(is_emptyish),
        Value::Object(o) => o.values().all(is_emptyish),
        Value::Bool(_) | Value::Number(_) => false,
    }
}

fn text_of(v: &Value) -> Option<String> {
    if is_emptyish(v) {
        return None;
    }
    Some(match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items
            .iter()
            .filter_map(text_of)
            .collect::<Vec<_>>()
            .join("\n"),
        other => other.to_string(),
    })
}

fn read_yes_no(v: &Value) -> Option<YesNo> {
    match v {
        Value::Bool(true) => Some(YesNo::Yes),
        Value::Bool(false) => Some(YesNo::No),
        Value::String(s) => {
            let t = s.trim_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation());
            if t.eq_ignore_ascii_case("yes") {
                Some(YesNo::Yes)
            } else if t.eq_ignore_ascii_case("no") {
                Some(YesNo::No)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Top-level object re-keyed by [`normalize_key`]. On collisions the
/// lexicographically first original key wins.
fn normalized_object(obj: &Map<String, Value>) -> Vec<(String, &Value)> {
    let mut out: Vec<(String, &Value)> = Vec::with_capacity(obj.len());
    for (k, v) in obj {
        let nk = normalize_key(k);
        if !out.iter().any(|(existing, _)| *existing == nk) {
            out.push((nk, v));
        }
    }
    out
}

fn lookup<'a>(obj: &[(String, &'a Value)], key: &str) -> Option<&'a Value> {
    let nk = normalize_key(key);
    obj.iter().find(|(k, _)| *k == nk).map(|(_, v)| *v)
}

/// Keys that must be present for the output to count as following the schema.
fn required_keys(schema: &SchemaSpec) -> Vec<&KeySpec> {
    let yes_no: Vec<&KeySpec> = schema.keys.iter().filter(|k| k.kind == KeyKind::YesNo).collect();
    if !yes_no.is_empty() {
        return yes_no;
    }
    schema
        .keys
        .iter()
        .filter(|k| {
            k.kind == KeyKind::Scalar && k.key_name != keys::DOCUMENTATION_SUMMARY && k.key_name != keys::CODE_SUMMARY
        })
        .collect()
}

/// A finding before it gets its id.
struct Draft {
    category: Category,
    doc_snippet: Option<String>,
    code_snippet: Option<String>,
    explanation: String,
    source_key: String,
}

/// Reads one follow-up item. Field roles are inferred from key prefixes so
/// any snippet naming the model picks still lands in the right slot.
fn draft_from_item(item: &Value, category: Category, source_key: &str) -> Option<Draft> {
    if is_emptyish(item) {
        return None;
    }
    let mut draft = Draft {
        category,
        doc_snippet: None,
        code_snippet: None,
        explanation: String::new(),
        source_key: source_key.to_string(),
    };
    match item {
        Value::Object(fields) => {
            let mut extra = Vec::new();
            for (k, v) in fields {
                let nk = normalize_key(k);
                if nk.starts_with("original_documentation_snippet") || nk.starts_with("documentation_snippet") {
                    draft.doc_snippet = draft.doc_snippet.or(text_of(v));
                } else if nk.starts_with("original_code_snippet") || nk.starts_with("code_snippet") {
                    draft.code_snippet = draft.code_snippet.or(text_of(v));
                } else if nk == keys::EXPLANATION {
                    if let Some(t) = text_of(v) {
                        draft.explanation = t;
                    }
                } else if let Some(t) = text_of(v) {
                    extra.push(t);
                }
            }
            if draft.explanation.is_empty() && !extra.is_empty() {
                draft.explanation = extra.join("\n");
            }
        }
        other => draft.explanation = text_of(other).unwrap_or_default(),
    }
    Some(draft)
}

/// Follow-up payload: object, list, bare string, or empty.
fn drafts_from_payload(payload: Option<&Value>, category: Category, source_key: &str) -> Vec<Draft> {
    match payload {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|item| draft_from_item(item, category, source_key))
            .collect(),
        Some(v) => draft_from_item(v, category, source_key).into_iter().collect(),
    }
}

/// Maps a free-text type label to a category. Precedence is fixed:
/// "over", then "mismatch"/"direct", then "under".
pub fn category_from_label(label: &str) -> Category {
    let l = label.to_lowercase();
    if l.contains("over") {
        Category::OverPromise
    } else if l.contains("mismatch") || l.contains("direct") {
        Category::DirectMismatch
    } else if l.contains("under") {
        Category::UnderPromise
    } else {
        Category::Uncategorized
    }
}

/// One flat finding built from the top-level CoT keys.
fn flat_cot_draft(obj: &[(String, &Value)], category: Category, source_key: &str) -> Option<Draft> {
    let doc = lookup(obj, keys::COT_DOC_SNIPPET).and_then(text_of);
    let code = lookup(obj, keys::COT_CODE_SNIPPET).and_then(text_of);
    let explanation = lookup(obj, keys::EXPLANATION).and_then(text_of);
    if doc.is_none() && code.is_none() && explanation.is_none() {
        return None;
    }
    Some(Draft {
        category,
        doc_snippet: doc,
        code_snippet: code,
        explanation: explanation.unwrap_or_default(),
        source_key: source_key.to_string(),
    })
}

pub fn parse_output(raw_text: &str, variant: PromptVariant, pair_id: &str) -> DetectionResult {
    let Some(block) = extract_json_block(raw_text) else {
        return DetectionResult::malformed(raw_text, variant, pair_id);
    };
    let Ok(Value::Object(map)) = serde_json::from_str::<Value>(&block) else {
        return DetectionResult::malformed(raw_text, variant, pair_id);
    };
    let obj = normalized_object(&map);
    let schema = schema_for_variant(variant);
    if required_keys(&schema).iter().any(|k| lookup(&obj, k.key_name).is_none()) {
        return DetectionResult::malformed(raw_text, variant, pair_id);
    }

    let drafts: Vec<Draft> = match variant {
        PromptVariant::V1 | PromptVariant::V3 => {
            let key = keys::IDENTIFIED_INCONSISTENCY;
            drafts_from_payload(lookup(&obj, key), Category::Uncategorized, key)
        }
        PromptVariant::V2 | PromptVariant::V4 => {
            flat_cot_draft(&obj, Category::Uncategorized, keys::EXPLANATION).into_iter().collect()
        }
        PromptVariant::V6 | PromptVariant::V7 => {
            let label = lookup(&obj, keys::INCONSISTENCY_TYPE).and_then(text_of);
            let category = label.as_deref().map(category_from_label).unwrap_or(Category::Uncategorized);
            flat_cot_draft(&obj, category, keys::INCONSISTENCY_TYPE).into_iter().collect()
        }
        PromptVariant::Dp => schema
            .category_pairs()
            .flat_map(|(check_in, follow_up)| {
                let answer = lookup(&obj, check_in.key_name).and_then(read_yes_no);
                if answer.is_some() && answer == check_in.expected_answer_for_findings {
                    let category = follow_up.category.unwrap_or(Category::Uncategorized);
                    drafts_from_payload(lookup(&obj, follow_up.key_name), category, follow_up.key_name)
                } else {
                    Vec::new()
                }
            })
            .collect(),
    };

    let prefilter_findings: Vec<Finding> = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| Finding {
            finding_id: format!("{pair_id}/{}", i + 1),
            category: d.category,
            doc_snippet: d.doc_snippet,
            code_snippet: d.code_snippet,
            explanation: d.explanation,
            source_key: d.source_key,
        })
        .collect();
    let findings = if variant.uses_external_filter() {
        apply_external_filter(&prefilter_findings)
    } else {
        prefilter_findings.clone()
    };
    DetectionResult {
        pair_id: pair_id.to_string(),
        variant,
        verdict: if findings.is_empty() {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        },
        findings,
        prefilter_findings,
        parse_status: ParseStatus::Ok,
        raw_text: raw_text.to_string(),
        doc_summary: lookup(&obj, keys::DOCUMENTATION_SUMMARY).and_then(text_of),
        code_summary: lookup(&obj, keys::CODE_SUMMARY).and_then(text_of),
    }
}
