use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use codeconv_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cc_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(cc_version()) }.to_str().unwrap();
    assert!(v.starts_with(env!("CARGO_PKG_VERSION").split('.').next().unwrap()));
}

#[test]
fn convolve_small_example() {
    let a = [1.0, 2.0, 3.0, 4.0];
    let x = [5.0, 6.0, 7.0, 8.0];
    let mut out = [0.0; 7];
    let st = unsafe { cc_convolve(a.as_ptr(), 4, x.as_ptr(), 4, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CcStatus::Ok);
    let want = [5.0, 16.0, 34.0, 60.0, 61.0, 52.0, 32.0];
    for (o, w) in out.iter().zip(want) {
        assert!((o - w).abs() < 1e-9);
    }
}

#[test]
fn convolve_reports_short_buffer_and_nulls() {
    let a = [1.0, 2.0];
    let mut out = [0.0; 2];
    let st = unsafe { cc_convolve(a.as_ptr(), 2, a.as_ptr(), 2, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CcStatus::BufferTooSmall);
    assert!(last_error().contains("need 3"));
    let st = unsafe { cc_convolve(ptr::null(), 2, a.as_ptr(), 2, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CcStatus::NullPointer);
    let st = unsafe { cc_convolve(a.as_ptr(), 0, a.as_ptr(), 2, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CcStatus::InvalidArgument);
}

#[test]
fn encode_decode_round_trip() {
    let (rows, cols, len) = (6, 3, 5);
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cc_encoding_matrix_new(rows, cols, &mut m) }, CcStatus::Ok);
    assert!(!m.is_null());

    let mut e = 0.0;
    assert_eq!(unsafe { cc_encoding_matrix_entry(m, 2, 0, &mut e) }, CcStatus::Ok);
    assert_eq!(e, 1.0);
    assert_eq!(unsafe { cc_encoding_matrix_entry(m, rows, 0, &mut e) }, CcStatus::InvalidArgument);

    let pieces: Vec<f64> = (0..cols * len).map(|i| (i as f64 * 0.37).sin()).collect();
    let picked = [5usize, 1, 3];
    let mut coded = Vec::new();
    for &r in &picked {
        let mut buf = vec![0.0; len];
        assert_eq!(unsafe { cc_encode(m, pieces.as_ptr(), len, r, buf.as_mut_ptr(), len) }, CcStatus::Ok);
        coded.extend(buf);
    }
    let mut out = vec![0.0; cols * len];
    let st = unsafe { cc_decode(m, picked.as_ptr(), 3, coded.as_ptr(), len, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CcStatus::Ok);
    for (o, p) in out.iter().zip(&pieces) {
        assert!((o - p).abs() < 1e-9);
    }

    let st = unsafe { cc_decode(m, picked.as_ptr(), 2, coded.as_ptr(), len, out.as_mut_ptr(), out.len()) };
    assert_eq!(st, CcStatus::InsufficientResults);
    unsafe { cc_encoding_matrix_free(m) };
    unsafe { cc_encoding_matrix_free(ptr::null_mut()) };
}

#[test]
fn matrix_rejects_bad_shape() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { cc_encoding_matrix_new(2, 3, &mut m) }, CcStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { cc_encoding_matrix_new(2, 3, ptr::null_mut()) }, CcStatus::NullPointer);
}

#[test]
fn episode_through_handles() {
    let mut sc = ptr::null_mut();
    assert_eq!(unsafe { cc_scenario_preset(1, 8, &mut sc) }, CcStatus::Ok);
    assert_eq!(unsafe { cc_scenario_set_stragglers(sc, 0.25, CcStragglerMode::Delayed, 15.0) }, CcStatus::Ok);
    assert_eq!(unsafe { cc_scenario_set_stragglers(sc, 2.0, CcStragglerMode::Delayed, 15.0) }, CcStatus::InvalidArgument);
    assert_eq!(unsafe { cc_scenario_set_b(sc, 64) }, CcStatus::Ok);
    assert_eq!(unsafe { cc_scenario_set_b(sc, 1 << 20) }, CcStatus::InvalidArgument);

    for strategy in [CcStrategy::Uncoded, CcStrategy::Coded, CcStrategy::Dynamic] {
        let mut a = CcEpisodeSummary::default();
        let mut b = CcEpisodeSummary::default();
        assert_eq!(unsafe { cc_run_episode(sc, strategy, 7, &mut a) }, CcStatus::Ok);
        assert_eq!(unsafe { cc_run_episode(sc, strategy, 7, &mut b) }, CcStatus::Ok);
        assert!(a.success);
        assert!(a.completion_time > 0.0 && a.completion_time <= a.horizon);
        assert!(a.pieces_dispatched > 0);
        assert_eq!(a, b);
    }
    assert_eq!(unsafe { cc_run_episode(sc, CcStrategy::Dynamic, 0, ptr::null_mut()) }, CcStatus::NullPointer);
    unsafe { cc_scenario_free(sc) };

    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { cc_scenario_preset(9, 8, &mut bad) }, CcStatus::InvalidArgument);
    assert!(bad.is_null());
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/codeconv.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["cc_convolve", "cc_decode", "cc_run_episode", "CC_STATUS_BUFFER_TOO_SMALL", "CcEpisodeSummary"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99"]).arg(&header).output() else {
        eprintln!("no C compiler found; skipped syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
