//! Invariants checked over generated inputs.

mod common;

use std::num::NonZeroUsize;

use proptest::prelude::*;

use common::gen;
use docdrift::analysis::{apply_external_filter, parse_output, DetectionResult, ParseStatus, Verdict};
use docdrift::category::Category;
use docdrift::evaluation::{
    cohens_kappa, compute_function_metrics, compute_inconsistency_metrics, kappa_from_table, FindingLabel,
    GroundTruthLabel, Judgment,
};
use docdrift::extraction::{apply_filters, extract_pairs_from_source, reconstruct, FilterConfig, SourceLanguage};
use docdrift::prompting::PromptVariant;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parsed_results_never_keep_under_promise(r in gen::detection_result()) {
        prop_assert!(r.findings.iter().all(|f| f.category != Category::UnderPromise));
        prop_assert_eq!(&r.findings, &gen::reference_filter(&r.prefilter_findings));
        prop_assert_eq!(r.is_flagged(), !r.findings.is_empty());
    }

    #[test]
    fn filter_matches_reference(findings in gen::findings()) {
        let kept = apply_external_filter(&findings);
        prop_assert_eq!(&kept, &gen::reference_filter(&findings));
        prop_assert_eq!(apply_external_filter(&kept), kept);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parse_output_is_total(raw in ".{0,400}", v in prop::sample::select(PromptVariant::ALL.to_vec())) {
        let r = parse_output(&raw, v, "p-1");
        if r.parse_status == ParseStatus::Malformed {
            prop_assert_eq!(r.verdict, Verdict::Consistent);
            prop_assert!(r.findings.is_empty() && r.prefilter_findings.is_empty());
        }
        prop_assert_eq!(r.raw_text, raw);
    }

    #[test]
    fn truncated_output_never_panics(raw in gen::dp_output(), cut in 0.0f64..1.0) {
        let mut at = (raw.len() as f64 * cut) as usize;
        while !raw.is_char_boundary(at) {
            at -= 1;
        }
        let r = parse_output(&raw[..at], PromptVariant::Dp, "p-1");
        prop_assert!(r.findings.len() <= r.prefilter_findings.len());
        if r.parse_status == ParseStatus::Malformed {
            prop_assert!(r.findings.is_empty());
        }
    }

    #[test]
    fn finding_ids_are_sequential(raw in gen::dp_output()) {
        let r = parse_output(&raw, PromptVariant::Dp, "p-7");
        for (i, f) in r.prefilter_findings.iter().enumerate() {
            prop_assert_eq!(&f.finding_id, &format!("p-7/{}", i + 1));
        }
    }

    #[test]
    fn filters_reach_a_fixed_point(
        pairs in gen::pairs(),
        min_tokens in 0usize..8,
        dedupe in any::<bool>(),
        sample in proptest::option::of(1usize..20),
        seed in any::<u64>(),
    ) {
        let cfg = FilterConfig {
            min_tokens,
            dedupe,
            sample_size: sample.and_then(NonZeroUsize::new),
            sample_seed: Some(seed),
        };
        let once = apply_filters(pairs, &cfg);
        let twice = apply_filters(once.clone(), &cfg);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn python_extraction_is_deterministic_and_reconstructs(src in gen::python_source()) {
        let a = extract_pairs_from_source(&src, SourceLanguage::Python, "m.py");
        let b = extract_pairs_from_source(&src, SourceLanguage::Python, "m.py");
        prop_assert_eq!(&a.pairs, &b.pairs);
        for p in &a.pairs {
            let (doc, code) = reconstruct(p, &src).unwrap();
            prop_assert_eq!(&doc, &p.doc_text);
            prop_assert_eq!(&code, &p.code_text);
        }
    }

    #[test]
    fn extraction_never_panics(src in ".{0,300}", lang in prop::sample::select(SourceLanguage::ALL.to_vec())) {
        let _ = extract_pairs_from_source(&src, lang, "x");
    }
}

fn result(pair_id: String, flagged: bool) -> DetectionResult {
    let mut r = DetectionResult::malformed("", PromptVariant::Dp, &pair_id);
    r.parse_status = ParseStatus::Ok;
    if flagged {
        r.verdict = Verdict::Inconsistent;
    }
    r
}

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() < 1e-12,
        (None, None) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn function_metrics_match_brute_force(cases in prop::collection::vec((any::<bool>(), any::<bool>()), 0..=200)) {
        let results: Vec<_> = cases.iter().enumerate().map(|(i, (f, _))| result(format!("p-{i}"), *f)).collect();
        let labels: Vec<_> = cases
            .iter()
            .enumerate()
            .map(|(i, (_, c))| GroundTruthLabel { pair_id: format!("p-{i}"), consistent: *c, note: None })
            .collect();
        let m = compute_function_metrics(&results, &labels).unwrap().metrics;

        let (mut tp, mut fp, mut tn, mut fneg) = (0.0, 0.0, 0.0, 0.0);
        for (flagged, consistent) in &cases {
            match (flagged, consistent) {
                (true, false) => tp += 1.0,
                (true, true) => fp += 1.0,
                (false, true) => tn += 1.0,
                (false, false) => fneg += 1.0,
            }
        }
        let div = |a: f64, b: f64| if b == 0.0 { None } else { Some(a / b) };
        let p = div(tp, tp + fp);
        let r = div(tp, tp + fneg);
        let f1 = match (p, r) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        let n = cases.len() as f64;
        prop_assert_eq!((m.tp, m.fp, m.tn, m.fn_), (tp as usize, fp as usize, tn as usize, fneg as usize));
        prop_assert!(close(m.precision, p));
        prop_assert!(close(m.recall, r));
        prop_assert!(close(m.f1, f1));
        prop_assert!(close(m.accuracy, div(tp + tn, n)));
        prop_assert!(close(m.flag_rate, div(tp + fp, n)));
    }

    #[test]
    fn inconsistency_metrics_match_brute_force(labels in prop::collection::vec((any::<bool>(), any::<bool>()), 0..60)) {
        let mut r = result("p-1".into(), false);
        let finding_labels: Vec<FindingLabel> = labels
            .iter()
            .enumerate()
            .map(|(i, (tp, under))| FindingLabel {
                finding_id: format!("p-1/{}", i + 1),
                judgment: if *tp { Judgment::Tp } else { Judgment::Fp },
                category_note: under.then(|| "Under-Promise really".to_string()),
            })
            .collect();
        for l in &finding_labels {
            r.findings.push(docdrift::analysis::Finding {
                finding_id: l.finding_id.clone(),
                category: Category::OverPromise,
                doc_snippet: None,
                code_snippet: None,
                explanation: String::new(),
                source_key: "k".into(),
            });
        }
        r.prefilter_findings = r.findings.clone();
        let m = compute_inconsistency_metrics(&[r], &finding_labels).unwrap();
        let tp = labels.iter().filter(|(t, _)| *t).count();
        let under = labels.iter().filter(|(_, u)| *u).count();
        prop_assert_eq!((m.findings, m.inconsistency_tp, m.inconsistency_fp, m.under_promise), (labels.len(), tp, labels.len() - tp, under));
        let n = labels.len() as f64;
        let expect = |x: usize| if labels.is_empty() { None } else { Some(x as f64 / n) };
        prop_assert!(close(m.inconsistency_precision, expect(tp)));
        prop_assert!(close(m.under_promise_rate, expect(under)));
    }

    #[test]
    fn kappa_is_symmetric_and_bounded(a in prop::collection::vec(any::<bool>(), 1..100), flips in prop::collection::vec(any::<bool>(), 100)) {
        let la: Vec<_> = a.iter().enumerate().map(|(i, c)| GroundTruthLabel { pair_id: format!("p-{i}"), consistent: *c, note: None }).collect();
        let lb: Vec<_> = a.iter().zip(&flips).enumerate().map(|(i, (c, f))| GroundTruthLabel { pair_id: format!("p-{i}"), consistent: c ^ f, note: None }).collect();
        let k1 = cohens_kappa(&la, &lb).unwrap();
        let k2 = cohens_kappa(&lb, &la).unwrap();
        prop_assert!((k1 - k2).abs() < 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&k1));
        prop_assert_eq!(cohens_kappa(&la, &la).unwrap(), 1.0);
    }

    #[test]
    fn kappa_table_matches_definition(a in 0usize..40, b in 0usize..40, c in 0usize..40, d in 0usize..40) {
        prop_assume!(a + b + c + d > 0);
        let n = (a + b + c + d) as f64;
        let po = (a + d) as f64 / n;
        let pe = ((a + b) as f64 / n) * ((a + c) as f64 / n) + ((c + d) as f64 / n) * ((b + d) as f64 / n);
        let k = kappa_from_table(a, b, c, d).unwrap();
        if (1.0 - pe).abs() > 1e-12 {
            prop_assert!((k - (po - pe) / (1.0 - pe)).abs() < 1e-9);
        } else {
            prop_assert_eq!(k, 1.0);
        }
    }
}
