//! proptest strategies shared by the property tests and the acceptance
//! runner.

use proptest::prelude::*;
use serde_json::{json, Map, Value};

use docdrift::analysis::{parse_output, DetectionResult, Finding};
use docdrift::category::Category;
use docdrift::extraction::{CodeDocPair, SourceLanguage};
use docdrift::prompting::{keys, PromptVariant};

fn words() -> impl Strategy<Value = String> {
    "[a-z]{1,8}( [a-z]{1,8}){0,5}"
}

fn answer() -> impl Strategy<Value = Value> {
    prop_oneof![
        4 => prop::sample::select(vec!["Yes", "No", "yes", "no", "YES", "No.", "Yes!", " no "]).prop_map(|s| json!(s)),
        1 => prop::sample::select(vec!["maybe", "", "N/A", "unclear"]).prop_map(|s| json!(s)),
        1 => any::<bool>().prop_map(Value::Bool),
    ]
}

fn item(doc_key: &'static str, code_key: Option<&'static str>) -> impl Strategy<Value = Value> {
    (proptest::option::of(words()), proptest::option::of(words()), proptest::option::of(words())).prop_map(
        move |(d, c, e)| {
            let mut m = Map::new();
            if let Some(d) = d {
                m.insert(doc_key.into(), json!(d));
            }
            if let (Some(k), Some(c)) = (code_key, c) {
                m.insert(k.into(), json!(c));
            }
            if let Some(e) = e {
                m.insert("explanation".into(), json!(e));
            }
            Value::Object(m)
        },
    )
}

fn payload(doc_key: &'static str, code_key: Option<&'static str>) -> impl Strategy<Value = Value> {
    prop_oneof![
        3 => prop::collection::vec(item(doc_key, code_key), 0..4).prop_map(Value::Array),
        1 => item(doc_key, code_key),
        1 => words().prop_map(Value::String),
        1 => Just(json!("None")),
        1 => Just(Value::Null),
    ]
}

/// Raw text shaped like a DP response, sometimes fenced or wrapped in
/// prose. Check-in keys are always present so it parses.
pub fn dp_output() -> impl Strategy<Value = String> {
    (
        (answer(), payload(keys::OVER_PROMISE_DOC_SNIPPET, None)),
        (answer(), payload(keys::DIRECT_MISMATCH_DOC_SNIPPET, Some(keys::DIRECT_MISMATCH_CODE_SNIPPET))),
        (answer(), payload(keys::UNDER_PROMISE_CODE_SNIPPET, None)),
        0..3u8,
    )
        .prop_map(|((oa, op), (da, dp), (ua, up), wrap)| {
            let v = json!({
                keys::DOCUMENTATION_SUMMARY: "summary",
                keys::CODE_SUMMARY: "summary",
                keys::OVER_PROMISE_CHECK_IN: oa,
                keys::OVER_PROMISE_FOLLOW_UP: op,
                keys::DIRECT_MISMATCH_CHECK_IN: da,
                keys::DIRECT_MISMATCH_FOLLOW_UP: dp,
                keys::UNDER_PROMISE_CHECK_IN: ua,
                keys::UNDER_PROMISE_FOLLOW_UP: up,
            });
            let body = serde_json::to_string_pretty(&v).unwrap();
            match wrap {
                0 => body,
                1 => format!("```json\n{body}\n```"),
                _ => format!("Analysis follows.\n{body}\nDone."),
            }
        })
}

/// Raw text shaped like a V6/V7 response with a free-form type label.
pub fn typed_output() -> impl Strategy<Value = String> {
    (
        prop::sample::select(vec!["over-promise", "Over promise", "direct mismatch", "under-promise", "Under-Promise", "none", "mixed"]),
        words(),
    )
        .prop_map(|(label, text)| {
            json!({
                keys::COT_DOC_SNIPPET: text,
                keys::COT_CODE_SNIPPET: "x = 1",
                keys::EXPLANATION: "because",
                keys::INCONSISTENCY_TYPE: label,
            })
            .to_string()
        })
}

/// A parsed result from one of the filtering variants.
pub fn detection_result() -> impl Strategy<Value = DetectionResult> {
    prop_oneof![
        3 => (dp_output(), 1..500u32).prop_map(|(raw, n)| parse_output(&raw, PromptVariant::Dp, &format!("p-{n}"))),
        1 => (typed_output(), prop::sample::select(vec![PromptVariant::V6, PromptVariant::V7]))
            .prop_map(|(raw, v)| parse_output(&raw, v, "p-1")),
    ]
}

pub fn category() -> impl Strategy<Value = Category> {
    prop::sample::select(vec![
        Category::OverPromise,
        Category::DirectMismatch,
        Category::UnderPromise,
        Category::Uncategorized,
    ])
}

pub fn findings() -> impl Strategy<Value = Vec<Finding>> {
    prop::collection::vec((category(), words()), 0..12).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (category, explanation))| Finding {
                finding_id: format!("p/{}", i + 1),
                category,
                doc_snippet: None,
                code_snippet: None,
                explanation,
                source_key: "k".into(),
            })
            .collect()
    })
}

/// Brute-force reference for the external filter.
pub fn reference_filter(findings: &[Finding]) -> Vec<Finding> {
    let mut out = Vec::new();
    for f in findings {
        if f.category == Category::UnderPromise {
            continue;
        }
        out.push(f.clone());
    }
    out
}

/// Pairs over a tiny vocabulary so duplicates and short texts are common.
pub fn pairs() -> impl Strategy<Value = Vec<CodeDocPair>> {
    let text = "(a|b|c)( (a|b|c)){0,10}";
    prop::collection::vec((text, text), 0..30).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (doc, code))| CodeDocPair {
                pair_id: format!("p-{}", i + 1),
                project: "p".into(),
                language: SourceLanguage::Python,
                file_path: "f.py".into(),
                function_name: format!("f{i}"),
                doc_text: doc,
                code_text: code,
                doc_span: (0, 0),
                code_span: (0, 0),
            })
            .collect()
    })
}

/// A Python module of documented, undocumented and nested functions.
pub fn python_source() -> impl Strategy<Value = String> {
    let func = (0..4u8, "[a-z]{1,6}", words(), any::<bool>());
    prop::collection::vec(func, 0..6).prop_map(|fs| {
        let mut src = String::from("import os\n\n");
        for (i, (shape, name, doc, nested)) in fs.into_iter().enumerate() {
            let name = format!("{name}_{i}");
            match shape {
                0 => src.push_str(&format!("def {name}(x):\n    return x\n\n")),
                1 => src.push_str(&format!("def {name}(x):\n    \"\"\"{doc}\"\"\"\n    return x + 1\n\n")),
                2 => src.push_str(&format!(
                    "class C{i}:\n    def {name}(self):\n        '''{doc}\n\n        more text\n        '''\n        return self\n\n"
                )),
                _ => src.push_str(&format!("async def {name}():\n    r\"\"\"{doc}\"\"\"\n    pass\n\n")),
            }
            if nested {
                src.push_str(&format!(
                    "def outer_{i}():\n    \"\"\"outer {doc}\"\"\"\n    def inner_{i}():\n        \"\"\"inner {doc}\"\"\"\n        return 1\n    return inner_{i}\n\n"
                ));
            }
        }
        src
    })
}
