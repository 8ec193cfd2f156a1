use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use chancoh_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(chc_last_error_message()) }.to_string_lossy().into_owned()
}

fn example(which: ChcExample) -> *mut ChcChannel {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { chc_example_channel(which, &mut out) }, ChcStatus::Ok);
    out
}

fn measure(phi: *const ChcChannel, m: ChcMeasure) -> ChcMeasureResult {
    let mut r = ChcMeasureResult { value: f64::NAN, lower_bound: 0.0, lambda: 0.0, iterations: 0, converged: false };
    assert_eq!(unsafe { chc_measure(phi, m, ptr::null(), &mut r) }, ChcStatus::Ok, "{}", last_error());
    r
}

#[test]
fn example_values_through_the_c_interface() {
    let phi1 = example(ChcExample::Phi1);
    let phi2 = example(ChcExample::Phi2);
    assert!((measure(phi1, ChcMeasure::TraceDistance).value - 1.5).abs() < 1e-4);
    assert!((measure(phi2, ChcMeasure::TraceDistance).value - 5.0 / 3.0).abs() < 1e-4);
    let rel = measure(phi1, ChcMeasure::RelativeEntropy);
    assert!((rel.value - 2.0).abs() < 1e-10);
    assert!(rel.lambda.is_nan());
    let modified = measure(phi1, ChcMeasure::ModifiedTraceDistance);
    assert!(modified.lambda >= 0.0 && modified.value <= 1.5 + 1e-8);
    unsafe {
        chc_channel_free(phi1);
        chc_channel_free(phi2);
    }
}

#[test]
fn choi_buffer_and_dims() {
    let phi = example(ChcExample::PhiMix);
    let (mut a, mut b) = (0usize, 0usize);
    assert_eq!(unsafe { chc_channel_dims(phi, &mut a, &mut b) }, ChcStatus::Ok);
    assert_eq!((a, b), (2, 5));
    let n = a * b;
    let mut small = vec![0.0; 10];
    assert_eq!(unsafe { chc_channel_choi(phi, small.as_mut_ptr(), small.len()) }, ChcStatus::InvalidArgument);
    let mut buf = vec![0.0; 2 * n * n];
    assert_eq!(unsafe { chc_channel_choi(phi, buf.as_mut_ptr(), buf.len()) }, ChcStatus::Ok);
    let trace: f64 = (0..n).map(|i| buf[2 * (i * n + i)]).sum();
    assert!((trace - 2.0).abs() < 1e-12);
    unsafe { chc_channel_free(phi) };
}

#[test]
fn json_round_trip_and_parse_errors() {
    let phi = example(ChcExample::Phi2);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { chc_channel_to_json(phi, &mut text) }, ChcStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { chc_channel_from_json(text, &mut back) }, ChcStatus::Ok);
    assert!((measure(back, ChcMeasure::L1).value - measure(phi, ChcMeasure::L1).value).abs() < 1e-14);

    let broken = CString::new("{\"dim_in\": 2").unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(unsafe { chc_channel_from_json(broken.as_ptr(), &mut none) }, ChcStatus::Parse);
    assert!(none.is_null());
    assert!(!last_error().is_empty());
    unsafe {
        chc_string_free(text);
        chc_channel_free(phi);
        chc_channel_free(back);
    }
}

#[test]
fn kraus_constructor_validates() {
    // identity qubit channel, one Kraus operator
    let id = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    let mut phi = ptr::null_mut();
    assert_eq!(unsafe { chc_channel_from_kraus(2, 2, 1, id.as_ptr(), &mut phi) }, ChcStatus::Ok);
    assert!((measure(phi, ChcMeasure::L1).value - 1.0).abs() < 1e-15);
    let half = id.map(|x| x * 0.5);
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { chc_channel_from_kraus(2, 2, 1, half.as_ptr(), &mut bad) }, ChcStatus::InvalidObject);
    assert!(last_error().contains("trace preserving"));
    unsafe { chc_channel_free(phi) };
}

#[test]
fn superchannel_apply_and_random_channels() {
    let mut phi = ptr::null_mut();
    assert_eq!(unsafe { chc_random_channel(2, 2, 2, false, 9, &mut phi) }, ChcStatus::Ok);
    let mut inc = ptr::null_mut();
    assert_eq!(unsafe { chc_random_channel(2, 2, 0, true, 9, &mut inc) }, ChcStatus::Ok);
    assert!(measure(inc, ChcMeasure::L1).value < 1e-15);
    let mut infeasible = ptr::null_mut();
    assert_eq!(unsafe { chc_random_channel(5, 2, 1, false, 0, &mut infeasible) }, ChcStatus::InvalidArgument);

    // swap the two input labels: Kraus X (x) I on the 4-dimensional Choi space
    let mut rows = Vec::new();
    for r in 0..4 {
        let row: Vec<String> =
            (0..4).map(|c| if c == (r + 2) % 4 { "[1,0]".to_string() } else { "[0,0]".to_string() }).collect();
        rows.push(format!("[{}]", row.join(",")));
    }
    let json = format!("{{\"dims_in\":[2,2],\"dims_out\":[2,2],\"kraus\":[[{}]]}}", rows.join(","));
    let json = CString::new(json).unwrap();
    let mut theta = ptr::null_mut();
    assert_eq!(unsafe { chc_superchannel_from_json(json.as_ptr(), &mut theta) }, ChcStatus::Ok, "{}", last_error());
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { chc_superchannel_apply(theta, phi, &mut out) }, ChcStatus::Ok, "{}", last_error());
    let before = measure(phi, ChcMeasure::RelativeEntropy).value;
    let after = measure(out, ChcMeasure::RelativeEntropy).value;
    assert!((before - after).abs() < 1e-10);
    unsafe {
        chc_superchannel_free(theta);
        chc_channel_free(out);
        chc_channel_free(phi);
        chc_channel_free(inc);
    }
}

#[test]
fn counterexample_report() {
    let mut r = ChcCounterexample {
        ctr_phi1: 0.0,
        ctr_phi2: 0.0,
        additive_rhs: 0.0,
        ctr_mix_upper: 0.0,
        ctr_mix_solved: 0.0,
        gap: 0.0,
        violated: false,
        converged: false,
    };
    assert_eq!(unsafe { chc_counterexample(ptr::null(), &mut r) }, ChcStatus::Ok);
    assert!((r.additive_rhs - 19.0 / 12.0).abs() < 1e-4);
    assert!(r.violated && r.converged);
    assert_eq!(unsafe { chc_counterexample(ptr::null(), ptr::null_mut()) }, ChcStatus::NullPointer);
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/chancoh.h")).unwrap();
    for name in [
        "chc_channel_from_kraus",
        "chc_channel_from_json",
        "chc_channel_free",
        "chc_measure",
        "chc_superchannel_apply",
        "chc_counterexample",
        "chc_last_error_message",
        "typedef struct ChcChannel ChcChannel",
        "CHC_STATUS_NOT_CONVERGED",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = target_dir().join("libchancoh_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let tmp = tempfile::tempdir().unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success(), "C compilation failed");
    let output = Command::new(&exe).output().unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    assert_eq!(String::from_utf8_lossy(&output.stdout).trim(), "ok");
}
