use std::ffi::{CStr, CString};
use std::ptr;

use trm_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { trm_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0, "expected an error message");
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn state(x: &[f64]) -> *mut TrmState {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { trm_state_new(x.as_ptr(), x.len(), &mut s) }, TrmStatus::Ok);
    s
}

#[test]
fn state_round_trip_and_validation() {
    let s = state(&[0.2, 0.3, 0.5]);
    let mut out = [0.0; 3];
    unsafe {
        assert_eq!(trm_state_dim(s), 3);
        assert_eq!(trm_state_components(s, out.as_mut_ptr(), 3), TrmStatus::Ok);
        assert_eq!(trm_state_components(s, out.as_mut_ptr(), 2), TrmStatus::BufferTooSmall);
        trm_state_free(s);
        trm_state_free(ptr::null_mut());
    }
    assert_eq!(out, [0.2, 0.3, 0.5]);

    let mut bad = ptr::null_mut();
    let x = [0.5, 0.6];
    assert_eq!(unsafe { trm_state_new(x.as_ptr(), 2, &mut bad) }, TrmStatus::Domain);
    assert!(bad.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { trm_state_new(ptr::null(), 2, &mut bad) },
        TrmStatus::NullPointer
    );
}

#[test]
fn geometry_calls() {
    let mut m = 0.0;
    assert_eq!(unsafe { trm_simplex_measure(3, &mut m) }, TrmStatus::Ok);
    assert!((m - 3f64.sqrt() / 2.0).abs() < 1e-15);
    assert_eq!(unsafe { trm_simplex_measure(1, &mut m) }, TrmStatus::Domain);

    let s = state(&[0.2, 0.3, 0.5]);
    let mut r = 0.0;
    let mut idx = 9;
    let l = [0.1, 0.1, 0.8];
    let tie = [0.2, 0.3, 0.5];
    unsafe {
        assert_eq!(trm_region_measure(s, 1, &mut r), TrmStatus::Ok);
        assert!((r - 0.3 * 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(trm_region_measure(s, 3, &mut r), TrmStatus::IndexOutOfRange);
        assert_eq!(trm_region_of(s, l.as_ptr(), 3, &mut idx), TrmStatus::Ok);
        assert_eq!(idx, 1);
        assert_eq!(trm_region_of(s, tie.as_ptr(), 3, &mut idx), TrmStatus::Boundary);
        trm_state_free(s);
    }
}

#[test]
fn measurement_calls() {
    let s = state(&[0.1, 0.2, 0.3, 0.4]);
    let labels = [0usize, 0, 1, 1];
    let mut p = ptr::null_mut();
    let mut rng = ptr::null_mut();
    let mut probs = [0.0; 2];
    let mut counts = [0u64; 2];
    let mut again = [0u64; 2];
    unsafe {
        assert_eq!(trm_partition_new(labels.as_ptr(), 4, &mut p), TrmStatus::Ok);
        assert_eq!(trm_partition_len(p), 2);
        assert_eq!(trm_outcome_probabilities(s, p, probs.as_mut_ptr(), 2), TrmStatus::Ok);
        assert!((probs[0] - 0.3).abs() < 1e-15 && (probs[1] - 0.7).abs() < 1e-15);

        let mut post = ptr::null_mut();
        assert_eq!(trm_collapse(s, p, 1, &mut post), TrmStatus::Ok);
        let mut c = [0.0; 4];
        trm_state_components(post, c.as_mut_ptr(), 4);
        assert!((c[2] - 3.0 / 7.0).abs() < 1e-15 && c[0] == 0.0);
        trm_state_free(post);

        assert_eq!(trm_rng_new(5, 0, &mut rng), TrmStatus::Ok);
        let mut block = 9;
        let mut post = ptr::null_mut();
        assert_eq!(trm_run_once(s, p, rng, &mut block, &mut post), TrmStatus::Ok);
        assert!(block < 2 && !post.is_null());
        trm_state_free(post);
        assert_eq!(trm_run_once(s, p, rng, &mut block, ptr::null_mut()), TrmStatus::Ok);
        trm_rng_free(rng);

        assert_eq!(trm_run_many(s, p, 10_000, 7, counts.as_mut_ptr(), 2), TrmStatus::Ok);
        assert_eq!(trm_run_many(s, p, 10_000, 7, again.as_mut_ptr(), 2), TrmStatus::Ok);
        assert_eq!(counts, again);
        assert_eq!(counts.iter().sum::<u64>(), 10_000);

        let bad = [0usize, 2, 2, 2];
        let mut q = ptr::null_mut();
        assert_ne!(trm_partition_new(bad.as_ptr(), 4, &mut q), TrmStatus::Ok);
        let huge = [usize::MAX, 0];
        assert_eq!(trm_partition_new(huge.as_ptr(), 2, &mut q), TrmStatus::Domain);
        trm_partition_free(p);
        trm_state_free(s);
    }
}

#[test]
fn closed_forms_and_checks() {
    let mut out = [0.0; 3];
    let l = [0.2, 0.5, 0.3];
    let (mut plus, mut minus) = (0.0, 0.0);
    let (mut flag, mut val) = (0, 0.0);
    unsafe {
        assert_eq!(
            trm_complementary_probabilities(l.as_ptr(), 3, out.as_mut_ptr(), 3),
            TrmStatus::Ok
        );
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(trm_epsilon_probability(0.25, 0.5, &mut plus, &mut minus), TrmStatus::Ok);
        assert!((plus - 0.75).abs() < 1e-15 && (minus - 0.25).abs() < 1e-15);
        assert_eq!(
            trm_epsilon_probability(0.2, 0.0, &mut plus, &mut minus),
            TrmStatus::Domain
        );

        assert_eq!(
            trm_kolmogorov_check(1.0, 0.0, 0.5, 1e-9, &mut flag, &mut val),
            TrmStatus::Ok
        );
        assert_eq!((flag, val), (1, 0.5));
        assert_eq!(
            trm_kolmogorov_check(1.5, 0.0, 0.5, 1e-9, &mut flag, &mut val),
            TrmStatus::Schema
        );
        assert_eq!(
            trm_qubit_embeddable(1.0, 0.5, 0.0, 1e-9, &mut flag, &mut val),
            TrmStatus::Ok
        );
        assert_eq!(flag, 0);
        assert!((val - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}

#[test]
fn universal_exact_call() {
    let s = state(&[0.3, 0.7]);
    let mut p = ptr::null_mut();
    let mut out = [0.0; 2];
    unsafe {
        trm_partition_singletons(2, &mut p);
        assert_eq!(
            trm_universal_probability_exact(s, 3, p, out.as_mut_ptr(), 2),
            TrmStatus::Ok
        );
        assert!((out[0] - 0.3).abs() < 1e-15);
        assert_eq!(
            trm_universal_probability_exact(s, 0, p, out.as_mut_ptr(), 2),
            TrmStatus::Domain
        );
        trm_partition_free(p);
        trm_state_free(s);
    }
}

#[test]
fn config_runner() {
    let cfg =
        CString::new(r#"{"schema_version":1,"kind":"classify","joints":[{"pVW":1,"pUW":0,"pUcV":0.5}]}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { trm_run_config_json(cfg.as_ptr(), &mut out) }, TrmStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { trm_string_free(out) };
    assert!(text.contains("\"classical_ok\": false"));

    let bad = CString::new("{oops").unwrap();
    assert_eq!(
        unsafe { trm_run_config_json(bad.as_ptr(), &mut out) },
        TrmStatus::Schema
    );
    assert!(last_error().contains("malformed"));

    let fault =
        CString::new(r#"{"schema_version":1,"kind":"oracle","seed":1,"states":5,"dims":[2],"inject_fault":true}"#)
            .unwrap();
    assert_eq!(
        unsafe { trm_run_config_json(fault.as_ptr(), &mut out) },
        TrmStatus::CheckFailed
    );
    unsafe { trm_string_free(out) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(trm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
