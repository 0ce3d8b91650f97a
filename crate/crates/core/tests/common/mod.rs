//! Shared fixtures for the integration and acceptance tests.
#![allow(dead_code)]

use std::path::PathBuf;

use docdrift::extraction::SourceLanguage;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn corpus_dir(language: SourceLanguage) -> PathBuf {
    fixtures_dir().join("corpus").join(language.as_str())
}

/// Every documented function in the corpus, in extraction order:
/// `(file_path, function_name)`. Written by reading the fixture files.
pub fn all_documented(language: SourceLanguage) -> Vec<(&'static str, &'static str)> {
    match language {
        SourceLanguage::Python => vec![
            ("pkg/counter.py", "make_counter"),
            ("pkg/counter.py", "step"),
            ("stats.py", "mean"),
            ("stats.py", "clamp"),
            ("stats.py", "variance"),
            ("z_copy.py", "mean"),
            ("z_copy.py", "normalize"),
        ],
        SourceLanguage::TypeScript => vec![
            ("Badge.tsx", "Badge"),
            ("collections.ts", "getRootCollectionsCount"),
            ("collections.ts", "prune"),
            ("math.ts", "addRounded"),
        ],
        SourceLanguage::Java => vec![
            ("src/Account.java", "Account"),
            ("src/Account.java", "toString"),
            ("src/Ledger.java", "recordAll"),
            ("src/Util.java", "parseCents"),
        ],
        SourceLanguage::Cpp => vec![
            ("algo.hpp", "larger"),
            ("io.cc", "write_all"),
            ("sorted_floats.cpp", "SORTED_FLOATS::operator[]"),
        ],
    }
}

/// Survivors of the default filters: `(pair_id, function_name)`.
/// Python loses `clamp` (7-token doc) and the copy of `mean` in z_copy.py.
pub fn filtered(language: SourceLanguage) -> Vec<(&'static str, &'static str)> {
    match language {
        SourceLanguage::Python => vec![
            ("corpus-1", "make_counter"),
            ("corpus-2", "step"),
            ("corpus-3", "mean"),
            ("corpus-5", "variance"),
            ("corpus-7", "normalize"),
        ],
        SourceLanguage::TypeScript => vec![
            ("corpus-1", "Badge"),
            ("corpus-2", "getRootCollectionsCount"),
            ("corpus-3", "prune"),
            ("corpus-4", "addRounded"),
        ],
        SourceLanguage::Java => vec![
            ("corpus-1", "Account"),
            ("corpus-2", "toString"),
            ("corpus-3", "recordAll"),
            ("corpus-4", "parseCents"),
        ],
        SourceLanguage::Cpp => vec![
            ("corpus-1", "larger"),
            ("corpus-2", "write_all"),
            ("corpus-3", "SORTED_FLOATS::operator[]"),
        ],
    }
}

pub fn golden_dir() -> PathBuf {
    fixtures_dir().join("golden")
}

/// Compares `actual` with a frozen golden file. With
/// `DOCDRIFT_UPDATE_GOLDEN=1` the file is (re)written instead.
pub fn check_golden(relative: &str, actual: &str) -> Result<(), String> {
    let path = golden_dir().join(relative);
    if std::env::var_os("DOCDRIFT_UPDATE_GOLDEN").is_some_and(|v| v == "1") {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{} differs from generated text", path.display()))
    }
}

/// The sample pair used for user-prompt goldens.
pub fn set_test_mode_pair() -> docdrift::extraction::CodeDocPair {
    let source = std::fs::read_to_string(golden_dir().join("set_test_mode.py")).unwrap();
    let mut out =
        docdrift::extraction::extract_pairs_from_source(&source, SourceLanguage::Python, "pandas/core/computation/expressions.py");
    assert_eq!(out.pairs.len(), 1);
    let mut pair = out.pairs.remove(0);
    pair.project = "pandas".into();
    pair.pair_id = "pandas-1".into();
    pair
}

/// Every system-prompt golden: `(relative path, variant, kind)`.
pub fn prompt_goldens() -> Vec<(String, docdrift::prompting::PromptVariant, docdrift::prompting::ProjectKind)> {
    use docdrift::prompting::{ProjectKind, PromptVariant};
    let mut out = Vec::new();
    for v in PromptVariant::ALL {
        for k in ProjectKind::ALL {
            out.push((format!("prompts/system_{}_{}.txt", v.as_str(), k.word()), v, k));
        }
    }
    out
}

pub mod e2e;
pub mod gen;
