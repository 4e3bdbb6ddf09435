use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use serde_json::Value;
use ssn_policy_forge_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = spf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    spf_string_free(p);
    s
}

fn scenario() -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data/scenarios/co-leak.json");
    cstr(&std::fs::read_to_string(path).unwrap())
}

const POLICY: &str = r#"{
  "id": "co-evacuate",
  "conditionAcas": [{ "aca": "the carbon monoxide concentration of tunnel ?a is ?b" }],
  "comparisons": [{ "var": "b", "op": ">", "value": 50 }],
  "action": { "aca": "evacuate tunnel ?a" }
}"#;

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(spf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn scenario_runs_to_the_trigger() {
    unsafe {
        let mut engine = ptr::null_mut();
        assert_eq!(
            spf_engine_from_scenario(scenario().as_ptr(), 0, false, &mut engine),
            SpfStatus::Ok
        );
        assert!(spf_last_error_message().is_null());
        let mut tick = 0;
        assert_eq!(spf_engine_step(engine, 40, &mut tick), SpfStatus::Ok);
        assert_eq!(tick, 40);

        let mut out = ptr::null_mut();
        assert_eq!(spf_engine_log_json(engine, 0, &mut out), SpfStatus::Ok);
        let log: Value = serde_json::from_str(&take(out)).unwrap();
        let log = log.as_array().unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(log[0]["tick"], 19);
        assert_eq!(log[0]["command"]["target"], "t3");

        assert_eq!(spf_engine_log_json(engine, 20, &mut out), SpfStatus::Ok);
        assert_eq!(take(out), "[]");

        assert_eq!(spf_engine_state_json(engine, &mut out), SpfStatus::Ok);
        let state: Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(state["tick"], 40);
        spf_engine_free(engine);
    }
}

#[test]
fn policy_lifecycle() {
    unsafe {
        let mut engine = ptr::null_mut();
        assert_eq!(spf_engine_new(3, &mut engine), SpfStatus::Ok);
        assert_eq!(spf_engine_upsert_policy(engine, cstr(POLICY).as_ptr()), SpfStatus::Ok);

        let mut out = ptr::null_mut();
        let id = cstr("co-evacuate");
        assert_eq!(spf_engine_policy_query(engine, id.as_ptr(), &mut out), SpfStatus::Ok);
        let query = take(out);
        assert!(query.contains("SELECT DISTINCT ?a"), "{query}");
        assert!(query.contains("FILTER (?b > 50)"), "{query}");

        assert_eq!(spf_engine_remove_policy(engine, id.as_ptr()), SpfStatus::Ok);
        assert_eq!(spf_engine_remove_policy(engine, id.as_ptr()), SpfStatus::NotFound);
        assert!(last_error().contains("co-evacuate"));
        assert_eq!(
            spf_engine_policy_query(engine, id.as_ptr(), &mut out),
            SpfStatus::NotFound
        );
        spf_engine_free(engine);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut engine = ptr::null_mut();
        assert_eq!(spf_engine_new(0, &mut engine), SpfStatus::Ok);

        let bad = cstr(r#"{"id": "p", "conditionAcas": [{"aca": "nope"}], "action": {"aca": "evacuate tunnel ?a"}}"#);
        assert_eq!(spf_engine_upsert_policy(engine, bad.as_ptr()), SpfStatus::InvalidPolicy);
        assert!(last_error().contains("unknown ACA id nope"));

        assert_eq!(
            spf_engine_upsert_policy(engine, cstr("{").as_ptr()),
            SpfStatus::InvalidJson
        );
        let leak = cstr(r#"{"kind": "gasLeak", "tunnel": "t42", "rate": 1, "duration": 5}"#);
        assert_eq!(spf_engine_inject_event(engine, leak.as_ptr()), SpfStatus::NotFound);
        let negative = cstr(r#"{"kind": "gasLeak", "tunnel": "t3", "rate": -1, "duration": 5}"#);
        assert_eq!(
            spf_engine_inject_event(engine, negative.as_ptr()),
            SpfStatus::InvalidInput
        );

        let invalid = [0xffu8, 0];
        assert_eq!(
            spf_engine_remove_policy(engine, invalid.as_ptr().cast()),
            SpfStatus::InvalidUtf8
        );
        assert_eq!(spf_engine_upsert_policy(engine, ptr::null()), SpfStatus::NullPointer);
        assert_eq!(
            spf_engine_step(ptr::null_mut(), 1, ptr::null_mut()),
            SpfStatus::NullPointer
        );
        assert_eq!(spf_engine_state_json(engine, ptr::null_mut()), SpfStatus::NullPointer);

        assert_eq!(spf_engine_step(engine, 1, ptr::null_mut()), SpfStatus::Ok);
        assert!(spf_last_error_message().is_null());
        spf_engine_free(engine);
        spf_engine_free(ptr::null_mut());
        spf_string_free(ptr::null_mut());
    }
}

#[test]
fn search_and_reset() {
    unsafe {
        let mut engine = ptr::null_mut();
        assert_eq!(spf_engine_new(9, &mut engine), SpfStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(
            spf_engine_search_acas(engine, cstr("").as_ptr(), &mut out),
            SpfStatus::Ok
        );
        let all: Vec<Value> = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(
            spf_engine_search_acas(engine, cstr("carbon monoxide").as_ptr(), &mut out),
            SpfStatus::Ok
        );
        let hits: Vec<Value> = serde_json::from_str(&take(out)).unwrap();
        assert!(!hits.is_empty() && hits.len() < all.len());
        assert!(hits[0]["label"].as_str().unwrap().contains("carbon monoxide"));

        let leak = cstr(r#"{"kind": "gasLeak", "tunnel": "t3", "rate": 4, "duration": 50}"#);
        assert_eq!(spf_engine_inject_event(engine, leak.as_ptr()), SpfStatus::Ok);
        assert_eq!(spf_engine_step(engine, 5, ptr::null_mut()), SpfStatus::Ok);
        assert_eq!(spf_engine_reset(engine, 0, false), SpfStatus::Ok);
        assert_eq!(spf_engine_state_json(engine, &mut out), SpfStatus::Ok);
        let state: Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(state["tick"], 0);
        assert!(state["events"].as_array().unwrap().is_empty());
        spf_engine_free(engine);
    }
}

#[test]
fn header_declares_the_surface_and_compiles() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/ssn_policy_forge.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "typedef struct SpfEngine SpfEngine;",
        "SPF_STATUS_INVALID_POLICY = 4",
        "spf_engine_from_scenario(",
        "spf_engine_policy_query(",
        "void spf_string_free(char *s);",
        "const char *spf_last_error_message(void);",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(status.success());
}

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .join("..")
        .join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let archive = lib_dir.join("libssn_policy_forge_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("static library or C compiler unavailable; skipping");
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("spf-smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let state: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(state["tick"], 3);
}
