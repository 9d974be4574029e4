use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use epimine_ffi::*;

fn seq_from(csv: &str) -> *mut EpimineSequence {
    let text = CString::new(csv).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { epimine_sequence_from_csv(text.as_ptr(), &mut out) }, EpimineStatus::Ok);
    out
}

fn last_error() -> String {
    let p = epimine_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn parallel_round_trip() {
    let seq = seq_from("A,0\nB,0.0005\nA,1\nB,1.0004\nC,3");
    assert_eq!(unsafe { epimine_sequence_len(seq) }, 5);
    let mut res = ptr::null_mut();
    let st = unsafe { epimine_mine_parallel(seq, 0.001, 0.2, 3, &mut res) };
    assert_eq!(st, EpimineStatus::Ok);
    assert_eq!(unsafe { epimine_result_max_size(res) }, 2);
    assert_eq!(unsafe { epimine_result_count(res, 2) }, 1);
    let json = unsafe { CStr::from_ptr(epimine_result_json(res)) }.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["schema"], "epimine-results/1");
    assert_eq!(v["levels"][1]["episodes"][0]["count"], 2);
    assert_eq!(v["levels"][1]["episodes"][0]["episode"]["nodes"], serde_json::json!(["A", "B"]));
    unsafe {
        epimine_result_free(res);
        epimine_sequence_free(seq);
    }
}

#[test]
fn serial_round_trip() {
    let seq = seq_from("A,0\nB,0.005\nA,1\nB,1.009");
    let (lo, hi) = ([0.004, 0.008], [0.006, 0.010]);
    let mut res = ptr::null_mut();
    let st = unsafe { epimine_mine_serial(seq, lo.as_ptr(), hi.as_ptr(), 2, 0.25, 2, &mut res) };
    assert_eq!(st, EpimineStatus::Ok);
    assert_eq!(unsafe { epimine_result_count(res, 2) }, 2);
    unsafe {
        epimine_result_free(res);
        epimine_sequence_free(seq);
    }
}

#[test]
fn error_codes() {
    let bad = CString::new("A,zero").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { epimine_sequence_from_csv(bad.as_ptr(), &mut out) }, EpimineStatus::Parse);
    assert!(out.is_null());
    assert!(last_error().contains("line 1"));

    assert_eq!(unsafe { epimine_sequence_from_csv(ptr::null(), &mut out) }, EpimineStatus::NullPointer);

    let seq = seq_from("A,0\nB,1");
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { epimine_mine_parallel(seq, -1.0, 0.0, 2, &mut res) }, EpimineStatus::Domain);
    assert_eq!(unsafe { epimine_mine_serial(seq, ptr::null(), ptr::null(), 0, 0.0, 2, &mut res) }, EpimineStatus::Domain);
    let (lo, hi) = ([0.5], [0.1]);
    assert_eq!(
        unsafe { epimine_mine_serial(seq, lo.as_ptr(), hi.as_ptr(), 1, 0.0, 2, &mut res) },
        EpimineStatus::Domain
    );
    assert!(res.is_null());

    let path = CString::new("/nonexistent/events.csv").unwrap();
    assert_eq!(unsafe { epimine_sequence_from_file(path.as_ptr(), &mut out) }, EpimineStatus::Io);

    // success clears the message
    assert_eq!(unsafe { epimine_mine_parallel(seq, 0.5, 0.0, 2, &mut res) }, EpimineStatus::Ok);
    assert!(epimine_last_error().is_null());
    unsafe {
        epimine_result_free(res);
        epimine_sequence_free(seq);
        epimine_sequence_free(ptr::null_mut());
        epimine_result_free(ptr::null_mut());
    }
    assert_eq!(unsafe { epimine_sequence_len(ptr::null()) }, 0);
}

#[test]
fn simulate_preset() {
    let params = CString::new(r#"{"duration": 2.0, "seed": 4}"#).unwrap();
    let preset = CString::new("example1").unwrap();
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { epimine_simulate(params.as_ptr(), preset.as_ptr(), &mut seq) }, EpimineStatus::Ok);
    let n = unsafe { epimine_sequence_len(seq) };
    assert!(n > 500 && n < 2000, "{n}");
    unsafe { epimine_sequence_free(seq) };

    let unknown = CString::new("nope").unwrap();
    assert_eq!(unsafe { epimine_simulate(ptr::null(), unknown.as_ptr(), &mut seq) }, EpimineStatus::Domain);
    let broken = CString::new("{").unwrap();
    assert_eq!(unsafe { epimine_simulate(broken.as_ptr(), ptr::null(), &mut seq) }, EpimineStatus::Parse);
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/epimine.h")).unwrap();
    for f in [
        "epimine_sequence_from_csv",
        "epimine_sequence_from_file",
        "epimine_simulate",
        "epimine_mine_parallel",
        "epimine_mine_serial",
        "epimine_result_json",
        "epimine_result_free",
        "epimine_sequence_free",
        "epimine_last_error",
        "typedef struct EpimineSequence EpimineSequence",
        "EPIMINE_STATUS_DOMAIN = 4",
    ] {
        assert!(header.contains(f), "missing {f}");
    }
}

/// Compiles a C program against the header and static library, when a C
/// compiler is around.
#[test]
fn c_program_links_and_runs() {
    let deps = std::env::current_exe().unwrap();
    let profile_dir = deps.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libepimine_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("epimine_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
