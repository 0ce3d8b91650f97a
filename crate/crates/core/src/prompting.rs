//! System/user prompt construction and output schemas for every prompt
//! variant.
//!
//! The full configuration ([`PromptVariant::Dp`]) never explains the three
//! inconsistency categories in prose. Each category is encoded as a yes/no
//! "check-in" key followed by a "follow-up" key that repeats the question
//! and collects the findings. The model only has to complete the JSON
//! locally, and the under-promise findings are dropped afterwards by
//! [`crate::analysis::apply_external_filter`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::error::{Error, Result};
use crate::extraction::CodeDocPair;

/// Frozen prompt text and schema key spellings. The prompt builder and the
/// output parser both read from here.
pub mod keys {
    pub const PREFIX_TEMPLATE: &str = "You are a code review expert for the {project_name} {project_kind}, \
working on identifying any inconsistencies between function-level code and its documentation. \
Given the code (enclosed within [CODE] [/CODE]) and its accompanying documentation \
(enclosed within [DOCUMENTATION][/DOCUMENTATION]), please identify any inconsistencies \
or information mismatches between them.";

    pub const SCHEMA_INTRO: &str = "Respond in the following JSON format:";

    pub const INSTRUCTED_CATEGORIZATION: &str = "You should focus on identifying three types of inconsistencies.\n\
1. Over-promise: Some core parts of the documentation are not implemented in the code.\n\
2. Direct mismatch: The code does not correctly implement what is mentioned in the documentation.\n\
3. Under-promise: Some code is not documented or mentioned in the documentation.";

    pub const INSTRUCTED_FILTER: &str =
        "Do not report inconsistencies in the third category, under-promise, in the final output.";

    pub const IDENTIFIED_INCONSISTENCY: &str = "identified_inconsistency";
    pub const COT_DOC_SNIPPET: &str = "original_documentation_snippet_that_has_conflicting_information_with_code";
    pub const COT_CODE_SNIPPET: &str = "original_code_snippet_that_has_conflicting_information_with_documentation";
    pub const EXPLANATION: &str = "explanation";
    pub const INCONSISTENCY_TYPE: &str = "inconsistency_type";

    pub const DOCUMENTATION_SUMMARY: &str = "Documentation_Summary";
    pub const CODE_SUMMARY: &str = "Code_Summary";

    pub const OVER_PROMISE_CHECK_IN: &str = "Is_any_core_part_of_the_documentation_not_implemented_in_the_code?";
    pub const OVER_PROMISE_FOLLOW_UP: &str = "If_yes_to_Is_any_core_part_of_the_documentation_not_implemented_in_the_code";
    pub const OVER_PROMISE_DOC_SNIPPET: &str = "original_documentation_snippet_that_is_not_implemented_in_the_code";

    pub const DIRECT_MISMATCH_CHECK_IN: &str =
        "Does_the_code_correctly_implement_what_is_mentioned_in_the_documentation?";
    pub const DIRECT_MISMATCH_FOLLOW_UP: &str =
        "If_no_to_Does_the_code_correctly_implement_what_is_mentioned_in_the_documentation";
    pub const DIRECT_MISMATCH_DOC_SNIPPET: &str =
        "original_documentation_snippet_that_has_conflicting_information_with_some_code_snippet";
    pub const DIRECT_MISMATCH_CODE_SNIPPET: &str =
        "original_code_snippet_that_has_conflicting_information_with_the_identified_documentation_snippet";

    pub const UNDER_PROMISE_CHECK_IN: &str = "Is_some_code_not_documented_or_mentioned_in_the_documentation?";
    pub const UNDER_PROMISE_FOLLOW_UP: &str = "If_yes_to_Is_some_code_not_documented_or_mentioned_in_the_documentation";
    pub const UNDER_PROMISE_CODE_SNIPPET: &str =
        "original_code_snippet_that_is_not_documented_or_mentioned_in_the_documentation";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PromptVariant {
    V1,
    V2,
    V3,
    V4,
    V6,
    V7,
    #[serde(rename = "DP")]
    Dp,
}

/// Prompt building blocks switched on by a variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Blocks {
    pub plain_json: bool,
    pub cot_json: bool,
    pub instructed_categorization: bool,
    pub local_categorization: bool,
    pub instructed_filter: bool,
    pub external_filter: bool,
    pub type_label: bool,
    pub summary: bool,
}

impl PromptVariant {
    pub const ALL: [PromptVariant; 7] = [
        PromptVariant::V1,
        PromptVariant::V2,
        PromptVariant::V3,
        PromptVariant::V4,
        PromptVariant::V6,
        PromptVariant::V7,
        PromptVariant::Dp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptVariant::V1 => "V1",
            PromptVariant::V2 => "V2",
            PromptVariant::V3 => "V3",
            PromptVariant::V4 => "V4",
            PromptVariant::V6 => "V6",
            PromptVariant::V7 => "V7",
            PromptVariant::Dp => "DP",
        }
    }

    pub fn blocks(self) -> Blocks {
        let none = Blocks::default();
        match self {
            PromptVariant::V1 => Blocks { plain_json: true, ..none },
            PromptVariant::V2 => Blocks { cot_json: true, ..none },
            PromptVariant::V3 => Blocks {
                plain_json: true,
                instructed_categorization: true,
                instructed_filter: true,
                ..none
            },
            PromptVariant::V4 => Blocks {
                cot_json: true,
                instructed_categorization: true,
                instructed_filter: true,
                ..none
            },
            PromptVariant::V6 => Blocks {
                cot_json: true,
                instructed_categorization: true,
                external_filter: true,
                type_label: true,
                ..none
            },
            PromptVariant::V7 => Blocks {
                cot_json: true,
                instructed_categorization: true,
                external_filter: true,
                type_label: true,
                summary: true,
                ..none
            },
            PromptVariant::Dp => Blocks {
                cot_json: true,
                local_categorization: true,
                external_filter: true,
                summary: true,
                ..none
            },
        }
    }

    pub fn uses_external_filter(self) -> bool {
        self.blocks().external_filter
    }
}

impl fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PromptVariant::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown prompt variant {s:?} (expected one of V1, V2, V3, V4, V6, V7, DP)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectKind {
    Library,
    Framework,
    Project,
}

impl ProjectKind {
    pub const ALL: [ProjectKind; 3] = [ProjectKind::Library, ProjectKind::Framework, ProjectKind::Project];

    pub fn word(self) -> &'static str {
        match self {
            ProjectKind::Library => "library",
            ProjectKind::Framework => "framework",
            ProjectKind::Project => "project",
        }
    }
}

impl FromStr for ProjectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProjectKind::ALL
            .into_iter()
            .find(|k| k.word().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown project kind {s:?} (expected library, framework or project)")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMeta {
    pub name: String,
    pub kind: ProjectKind,
}

impl ProjectMeta {
    pub fn new(name: impl Into<String>, kind: ProjectKind) -> Self {
        ProjectMeta {
            name: name.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Scalar,
    YesNo,
    FindingList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YesNo {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySpec {
    pub key_name: &'static str,
    pub kind: KeyKind,
    pub category: Option<Category>,
    /// For check-in keys: the answer that means findings follow.
    pub expected_answer_for_findings: Option<YesNo>,
    /// For follow-up keys: the fields of each listed finding.
    pub item_fields: Vec<&'static str>,
}

impl KeySpec {
    fn scalar(key_name: &'static str) -> Self {
        KeySpec {
            key_name,
            kind: KeyKind::Scalar,
            category: None,
            expected_answer_for_findings: None,
            item_fields: Vec::new(),
        }
    }

    fn check_in(key_name: &'static str, category: Category, expected: YesNo) -> Self {
        KeySpec {
            key_name,
            kind: KeyKind::YesNo,
            category: Some(category),
            expected_answer_for_findings: Some(expected),
            item_fields: Vec::new(),
        }
    }

    fn follow_up(key_name: &'static str, category: Category, item_fields: Vec<&'static str>) -> Self {
        KeySpec {
            key_name,
            kind: KeyKind::FindingList,
            category: Some(category),
            expected_answer_for_findings: None,
            item_fields,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaSpec {
    pub keys: Vec<KeySpec>,
}

impl SchemaSpec {
    pub fn key_names(&self) -> Vec<&'static str> {
        self.keys.iter().map(|k| k.key_name).collect()
    }

    /// `(check-in, follow-up)` key pairs in schema order.
    pub fn category_pairs(&self) -> impl Iterator<Item = (&KeySpec, &KeySpec)> {
        self.keys
            .windows(2)
            .filter(|w| w[0].kind == KeyKind::YesNo && w[1].kind == KeyKind::FindingList)
            .map(|w| (&w[0], &w[1]))
    }

    /// The schema rendered the way it appears in the system prompt.
    pub fn render(&self) -> String {
        let entries: Vec<String> = self
            .keys
            .iter()
            .map(|k| match k.kind {
                KeyKind::Scalar => format!("\"{}\": \"...\"", k.key_name),
                KeyKind::YesNo => format!("\"{}\": \"Yes\" or \"No\"", k.key_name),
                KeyKind::FindingList => {
                    let fields: Vec<String> = k.item_fields.iter().map(|f| format!("\"{f}\": \"...\"")).collect();
                    format!("\"{}\": [{{{}}}]", k.key_name, fields.join(", "))
                }
            })
            .collect();
        format!("{{{}}}", entries.join(",\n "))
    }
}

/// Builds the follow-up key for a check-in question: `If_yes_to_` or
/// `If_no_to_` followed by the question without its question mark.
pub fn follow_up_key(check_in: &str, answer: YesNo) -> String {
    let lead = match answer {
        YesNo::Yes => "If_yes_to_",
        YesNo::No => "If_no_to_",
    };
    format!("{lead}{}", check_in.trim_end_matches('?'))
}

pub fn schema_for_variant(variant: PromptVariant) -> SchemaSpec {
    use keys::*;
    let cot = || {
        vec![
            KeySpec::scalar(COT_DOC_SNIPPET),
            KeySpec::scalar(COT_CODE_SNIPPET),
            KeySpec::scalar(EXPLANATION),
        ]
    };
    let summaries = || vec![KeySpec::scalar(DOCUMENTATION_SUMMARY), KeySpec::scalar(CODE_SUMMARY)];

    let keys = match variant {
        PromptVariant::V1 | PromptVariant::V3 => vec![KeySpec::scalar(IDENTIFIED_INCONSISTENCY)],
        PromptVariant::V2 | PromptVariant::V4 => cot(),
        PromptVariant::V6 => {
            let mut k = vec![KeySpec::scalar(INCONSISTENCY_TYPE)];
            k.extend(cot());
            k
        }
        PromptVariant::V7 => {
            let mut k = summaries();
            k.push(KeySpec::scalar(INCONSISTENCY_TYPE));
            k.extend(cot());
            k
        }
        PromptVariant::Dp => {
            let mut k = summaries();
            k.extend([
                KeySpec::check_in(OVER_PROMISE_CHECK_IN, Category::OverPromise, YesNo::Yes),
                KeySpec::follow_up(
                    OVER_PROMISE_FOLLOW_UP,
                    Category::OverPromise,
                    vec![OVER_PROMISE_DOC_SNIPPET, EXPLANATION],
                ),
                KeySpec::check_in(DIRECT_MISMATCH_CHECK_IN, Category::DirectMismatch, YesNo::No),
                KeySpec::follow_up(
                    DIRECT_MISMATCH_FOLLOW_UP,
                    Category::DirectMismatch,
                    vec![DIRECT_MISMATCH_DOC_SNIPPET, DIRECT_MISMATCH_CODE_SNIPPET, EXPLANATION],
                ),
                KeySpec::check_in(UNDER_PROMISE_CHECK_IN, Category::UnderPromise, YesNo::Yes),
                KeySpec::follow_up(
                    UNDER_PROMISE_FOLLOW_UP,
                    Category::UnderPromise,
                    vec![UNDER_PROMISE_CODE_SNIPPET, EXPLANATION],
                ),
            ]);
            k
        }
    };
    SchemaSpec { keys }
}

/// The system prompt: prefix, any prose instructions the variant carries,
/// then the output schema.
pub fn build_system_prompt(variant: PromptVariant, project: &ProjectMeta) -> String {
    let blocks = variant.blocks();
    let mut sections = vec![keys::PREFIX_TEMPLATE
        .replace("{project_name}", &project.name)
        .replace("{project_kind}", project.kind.word())];
    if blocks.instructed_categorization {
        sections.push(keys::INSTRUCTED_CATEGORIZATION.to_string());
    }
    if blocks.instructed_filter {
        sections.push(keys::INSTRUCTED_FILTER.to_string());
    }
    sections.push(format!("{}\n{}", keys::SCHEMA_INTRO, schema_for_variant(variant).render()));
    sections.join("\n\n")
}

/// `[DOCUMENTATION]doc[/DOCUMENTATION]\n[CODE]code[/CODE]`, verbatim.
pub fn build_user_prompt(pair: &CodeDocPair) -> String {
    format!(
        "[DOCUMENTATION]{}[/DOCUMENTATION]\n[CODE]{}[/CODE]",
        pair.doc_text, pair.code_text
    )
}
