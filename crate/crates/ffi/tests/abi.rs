use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use seqpredict_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sp_last_error_message()) }.to_string_lossy().into_owned()
}

fn sequence(labels: &[u64]) -> *mut SpSequence {
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { sp_sequence_new(labels.as_ptr(), labels.len(), &mut seq) }, SpStatus::Ok);
    seq
}

fn sticky(n: usize) -> Vec<u64> {
    // deterministic runs of varying length
    let mut out = Vec::with_capacity(n);
    let mut state = 7u64;
    let mut x = 0x2545_f491_4f6c_dd1du64;
    while out.len() < n {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        let run = 1 + (x % 12) as usize;
        out.extend(std::iter::repeat_n(state, run.min(n - out.len())));
        state = if state == 7 { 42 } else { 7 };
    }
    out
}

#[test]
fn alternating_sequence_entropies() {
    let labels: Vec<u64> = (0..10).map(|k| if k % 2 == 0 { 100 } else { 7 }).collect();
    let seq = sequence(&labels);
    unsafe {
        assert_eq!(sp_sequence_len(seq), 10);
        assert_eq!(sp_sequence_alphabet_size(seq), 2);
        let mut r = SpEntropyReport::default();
        assert_eq!(sp_entropy_report(seq, &mut r), SpStatus::Ok);
        assert!((r.h1 - 1.0).abs() < 1e-12 && r.h2.abs() < 1e-12 && (r.mi - 1.0).abs() < 1e-12);
        assert!(!r.has_corrected);
        assert_eq!(sp_corrected_report(seq, SpConvention::Split, &mut r), SpStatus::Ok);
        assert!(r.has_corrected && r.h1_corrected > r.h1);
        sp_sequence_free(seq);
    }
}

#[test]
fn bias_values() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(sp_bias_h1(4, 100, &mut v), SpStatus::Ok);
        assert!((v - -3.0 / (200.0 * std::f64::consts::LN_2)).abs() < 1e-15);
        assert_eq!(sp_bias_mi(2, [1usize, 1].as_ptr(), 2, 5, &mut v), SpStatus::Ok);
        assert!((v - -1.0 / (10.0 * std::f64::consts::LN_2)).abs() < 1e-15);
        assert_eq!(sp_bias_h2([2usize, 1].as_ptr(), 2, 10, &mut v), SpStatus::Ok);
        assert!((v - -1.0 / (20.0 * std::f64::consts::LN_2)).abs() < 1e-15);
    }
}

#[test]
fn bootstrap_through_handles() {
    let seq = sequence(&sticky(2000));
    let opts = sp_bootstrap_options_default(11);
    assert_eq!(opts.replicates, 1000);
    assert_eq!(opts.mode, SpMode::Full);
    let opts = SpBootstrapOptions { replicates: 200, ..opts };
    unsafe {
        let mut res = ptr::null_mut();
        assert_eq!(sp_bootstrap(seq, &opts, &mut res), SpStatus::Ok);
        let mut s = SpBootstrapSummary::default();
        assert_eq!(sp_bootstrap_summary(res, &mut s), SpStatus::Ok);
        assert!(s.reject_null && s.gap > 0.0 && s.replicates == 200);
        assert_eq!(sp_bootstrap_replicates(res, ptr::null_mut(), 0), 200);
        let mut buf = vec![0.0; 5];
        assert_eq!(sp_bootstrap_replicates(res, buf.as_mut_ptr(), buf.len()), 200);
        assert!(buf.iter().all(|x| x.is_finite() && *x < s.mi_true));

        let mut again = ptr::null_mut();
        assert_eq!(sp_bootstrap(seq, &opts, &mut again), SpStatus::Ok);
        let mut s2 = SpBootstrapSummary::default();
        sp_bootstrap_summary(again, &mut s2);
        assert_eq!(s, s2);
        sp_bootstrap_free(again);
        sp_bootstrap_free(res);
        sp_sequence_free(seq);
    }
}

#[test]
fn markoff_through_handles() {
    let seq = sequence(&sticky(1000));
    let opts = SpBootstrapOptions { replicates: 100, ..sp_bootstrap_options_default(3) };
    let rates = [0.0, 0.5, 0.9, 0.99];
    unsafe {
        let mut prof = ptr::null_mut();
        assert_eq!(sp_markoff_sweep(seq, rates.as_ptr(), rates.len(), &opts, &mut prof), SpStatus::Ok);
        assert_eq!(sp_markoff_len(prof), 4);
        let mut p = SpMarkoffPoint::default();
        assert_eq!(sp_markoff_point(prof, 1, &mut p), SpStatus::Ok);
        assert_eq!((p.rate, p.retained), (0.5, 500));
        assert_eq!(sp_markoff_point(prof, 4, &mut p), SpStatus::InvalidArgument);
        let mut rate = -1.0;
        let has = sp_markoff_critical_rate(prof, &mut rate);
        assert!(!has || rates.contains(&rate));
        sp_markoff_free(prof);

        let bad = [0.5, 0.2];
        assert_eq!(sp_markoff_sweep(seq, bad.as_ptr(), 2, &opts, &mut prof), SpStatus::InvalidArgument);
        let too_deep = [0.9995];
        assert_eq!(sp_markoff_sweep(seq, too_deep.as_ptr(), 1, &opts, &mut prof), SpStatus::TooFewRemaining);
        sp_sequence_free(seq);
    }
}

#[test]
fn t_test_values() {
    let a = [1.0, 2.0, 3.0];
    let b = [2.0, 3.0, 4.0];
    let mut t = SpTTest::default();
    unsafe {
        assert_eq!(sp_t_test(a.as_ptr(), 3, b.as_ptr(), 3, false, &mut t), SpStatus::Ok);
        assert!((t.t_stat + 1.224_744_871_391_589).abs() < 1e-12);
        assert_eq!(t.df, 4.0);
        assert!((t.p_value - 0.2879).abs() < 1e-3);
        let ones = [1.0, 1.0];
        assert_eq!(sp_t_test(ones.as_ptr(), 2, ones.as_ptr(), 2, false, &mut t), SpStatus::DegenerateVariance);
        assert!(last_error().contains("variance"));
    }
}

#[test]
fn error_codes_and_messages() {
    let mut seq = ptr::null_mut();
    unsafe {
        assert_eq!(sp_sequence_new([1u64].as_ptr(), 1, &mut seq), SpStatus::Ok);
        let mut r = SpEntropyReport::default();
        assert_eq!(sp_entropy_report(seq, &mut r), SpStatus::SequenceTooShort);
        assert!(last_error().contains("too short"));
        sp_sequence_free(seq);
        seq = ptr::null_mut();
        assert_eq!(sp_sequence_new(ptr::null(), 5, &mut seq), SpStatus::NullPointer);
        assert!(last_error().contains("labels"));
        assert!(seq.is_null());
        assert_eq!(sp_sequence_new([1u64, 2].as_ptr(), 2, ptr::null_mut()), SpStatus::NullPointer);
        assert_eq!(sp_entropy_report(ptr::null(), &mut r), SpStatus::NullPointer);

        let s = sequence(&[1, 2, 1, 2]);
        let opts = SpBootstrapOptions { replicates: 10, ..sp_bootstrap_options_default(0) };
        let mut res = ptr::null_mut();
        assert_eq!(sp_bootstrap(s, &opts, &mut res), SpStatus::InsufficientReplicates);
        sp_sequence_free(s);

        sp_sequence_free(ptr::null_mut());
        sp_bootstrap_free(ptr::null_mut());
        sp_markoff_free(ptr::null_mut());
        assert_eq!(sp_sequence_len(ptr::null()), 0);
    }
    let version = unsafe { CStr::from_ptr(sp_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = format!("{dir}/include/seqpredict.h");
    let src = std::fs::read_to_string(&header).unwrap();
    for name in ["sp_sequence_new", "sp_bootstrap", "sp_markoff_sweep", "sp_t_test", "SP_STATUS_OK"] {
        assert!(src.contains(name), "{name} missing from header");
    }
    let Ok(out) = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", &format!("{dir}/include")])
        .arg(format!("{dir}/examples/demo.c"))
        .output()
    else {
        eprintln!("no C compiler; skipping syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
