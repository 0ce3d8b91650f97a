use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use docdrift_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a library string.
fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { dd_string_free(p) };
    s
}

fn last_error() -> String {
    let p = dd_last_error();
    assert!(!p.is_null(), "no error recorded");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn e2e_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/e2e")
}

fn extract_e2e() -> String {
    let root = c(e2e_dir().join("corpus").to_str().unwrap());
    let mut out = ptr::null_mut();
    let st = unsafe { dd_extract(root.as_ptr(), c("python").as_ptr(), c("e2e").as_ptr(), 7, true, &mut out) };
    assert_eq!(st, DdStatus::Ok);
    take(out)
}

fn detect_e2e(pairs: &str) -> String {
    let fixtures = c(e2e_dir().join("fixtures").to_str().unwrap());
    let mut client = ptr::null_mut();
    assert_eq!(unsafe { dd_client_new_replay(fixtures.as_ptr(), &mut client) }, DdStatus::Ok);
    let mut out = ptr::null_mut();
    let st = unsafe {
        dd_detect(
            client,
            c(pairs).as_ptr(),
            c("DP").as_ptr(),
            c("e2e").as_ptr(),
            c("library").as_ptr(),
            c("fixture-model").as_ptr(),
            4,
            &mut out,
        )
    };
    unsafe { dd_client_free(client) };
    assert_eq!(st, DdStatus::Ok, "{}", last_error());
    take(out)
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(dd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn replayed_pipeline_through_the_c_api() {
    let pairs = extract_e2e();
    let parsed: serde_json::Value = serde_json::from_str(&pairs).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 20);
    let results = detect_e2e(&pairs);

    let mut summary = ptr::null_mut();
    assert_eq!(unsafe { dd_summary(c(&results).as_ptr(), &mut summary) }, DdStatus::Ok);
    let summary: serde_json::Value = serde_json::from_str(&take(summary)).unwrap();
    assert_eq!(summary["totals"]["flagged"], 4);

    let mut html = ptr::null_mut();
    let st = unsafe { dd_render_report(c(&results).as_ptr(), c(&pairs).as_ptr(), ptr::null(), &mut html) };
    assert_eq!(st, DdStatus::Ok);
    assert!(take(html).contains("4 flagged"));

    let jsonl_to_array = |name: &str| {
        let text = std::fs::read_to_string(e2e_dir().join(name)).unwrap();
        format!("[{}]", text.lines().filter(|l| !l.trim().is_empty()).collect::<Vec<_>>().join(","))
    };
    let labels = c(&jsonl_to_array("labels.jsonl"));
    let finding_labels = c(&jsonl_to_array("finding_labels.jsonl"));
    let mut metrics = ptr::null_mut();
    let st = unsafe { dd_metrics_compute(c(&results).as_ptr(), labels.as_ptr(), finding_labels.as_ptr(), &mut metrics) };
    assert_eq!(st, DdStatus::Ok);
    let mut f = DdFunctionMetrics {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
        flag_rate: 0.0,
        precision: 0.0,
        recall: 0.0,
        accuracy: 0.0,
        f1: 0.0,
    };
    assert_eq!(unsafe { dd_metrics_function(metrics, &mut f) }, DdStatus::Ok);
    assert_eq!((f.tp, f.fp, f.tn, f.fn_), (3, 1, 14, 2));
    assert!((f.precision - 0.75).abs() < 1e-12);
    let mut i = DdInconsistencyMetrics {
        findings: 0,
        tp: 0,
        fp: 0,
        precision: 0.0,
        under_promise: 0,
        under_promise_rate: 0.0,
    };
    assert_eq!(unsafe { dd_metrics_inconsistency(metrics, &mut i) }, DdStatus::Ok);
    assert_eq!((i.findings, i.tp, i.fp, i.under_promise), (6, 4, 2, 1));
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { dd_metrics_to_json(metrics, &mut json) }, DdStatus::Ok);
    assert!(take(json).contains("\"precision\": 0.75"));
    unsafe { dd_metrics_free(metrics) };
}

#[test]
fn metrics_without_function_labels() {
    let results = detect_e2e(&extract_e2e());
    let fl = c(r#"[{"finding_id":"e2e-2/1","judgment":"tp"},{"finding_id":"e2e-2/2","judgment":"tp"},
        {"finding_id":"e2e-7/1","judgment":"tp"},{"finding_id":"e2e-7/2","judgment":"tp"},
        {"finding_id":"e2e-10/1","judgment":"tp"},{"finding_id":"e2e-14/1","judgment":"fp"}]"#);
    let mut metrics = ptr::null_mut();
    let st = unsafe { dd_metrics_compute(c(&results).as_ptr(), ptr::null(), fl.as_ptr(), &mut metrics) };
    assert_eq!(st, DdStatus::Ok);
    let mut f = std::mem::MaybeUninit::<DdFunctionMetrics>::uninit();
    assert_eq!(unsafe { dd_metrics_function(metrics, f.as_mut_ptr()) }, DdStatus::Label);
    assert!(last_error().contains("ground-truth"));
    unsafe { dd_metrics_free(metrics) };
}

#[test]
fn error_codes_and_messages() {
    let mut out = ptr::null_mut();
    let st = unsafe { dd_extract(c("/no/such/dir").as_ptr(), c("python").as_ptr(), c("x").as_ptr(), 7, true, &mut out) };
    assert_eq!(st, DdStatus::Corpus);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let st = unsafe { dd_extract(ptr::null(), c("python").as_ptr(), c("x").as_ptr(), 7, true, &mut out) };
    assert_eq!(st, DdStatus::NullArgument);
    assert!(last_error().contains("root"));

    let st = unsafe { dd_system_prompt(c("V5").as_ptr(), c("p").as_ptr(), c("library").as_ptr(), &mut out) };
    assert_eq!(st, DdStatus::Config);

    let st = unsafe { dd_user_prompt(c("{not json").as_ptr(), &mut out) };
    assert_eq!(st, DdStatus::InvalidJson);

    let bad_utf8 = [0xffu8, 0xfe, 0];
    let st = unsafe { dd_parse_output(bad_utf8.as_ptr().cast(), c("DP").as_ptr(), c("p-1").as_ptr(), &mut out) };
    assert_eq!(st, DdStatus::InvalidUtf8);

    let st = unsafe { dd_system_prompt(c("DP").as_ptr(), c("p").as_ptr(), c("library").as_ptr(), ptr::null_mut()) };
    assert_eq!(st, DdStatus::NullArgument);

    // success clears the previous message
    let st = unsafe { dd_system_prompt(c("DP").as_ptr(), c("p").as_ptr(), c("library").as_ptr(), &mut out) };
    assert_eq!(st, DdStatus::Ok);
    assert!(dd_last_error().is_null());
    assert!(take(out).contains("You are a code review expert for the p library"));
}

#[test]
fn replay_miss_reports_fixture_status() {
    let pairs = extract_e2e();
    let dir = tempfile::tempdir().unwrap();
    let mut client = ptr::null_mut();
    let d = c(dir.path().to_str().unwrap());
    assert_eq!(unsafe { dd_client_new_replay(d.as_ptr(), &mut client) }, DdStatus::Ok);
    let mut out = ptr::null_mut();
    let st = unsafe {
        dd_detect(
            client,
            c(&pairs).as_ptr(),
            c("DP").as_ptr(),
            c("e2e").as_ptr(),
            c("library").as_ptr(),
            c("m").as_ptr(),
            2,
            &mut out,
        )
    };
    assert_eq!(st, DdStatus::FixtureMiss);
    assert!(last_error().contains("e2e-1"));
    unsafe { dd_client_free(client) };
    let st = unsafe { dd_detect(ptr::null(), c("[]").as_ptr(), c("DP").as_ptr(), c("e").as_ptr(), c("library").as_ptr(), c("m").as_ptr(), 1, &mut out) };
    assert_eq!(st, DdStatus::NullArgument);
}

#[test]
fn parse_output_and_kappa() {
    let raw = c("no json here");
    let mut out = ptr::null_mut();
    let st = unsafe { dd_parse_output(raw.as_ptr(), c("DP").as_ptr(), c("p-1").as_ptr(), &mut out) };
    assert_eq!(st, DdStatus::Ok);
    let r: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(r["parse_status"], "malformed");
    assert_eq!(r["verdict"], "consistent");

    let mut k = 0.0;
    assert_eq!(unsafe { dd_kappa_from_table(20, 5, 10, 15, &mut k) }, DdStatus::Ok);
    assert!((k - 0.4).abs() < 1e-4);
    assert_eq!(unsafe { dd_kappa_from_table(0, 0, 0, 0, &mut k) }, DdStatus::Label);
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        dd_string_free(ptr::null_mut());
        dd_client_free(ptr::null_mut());
        dd_metrics_free(ptr::null_mut());
    }
}
