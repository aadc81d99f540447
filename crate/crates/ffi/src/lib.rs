//! C ABI for `seqpredict`.
//!
//! Every fallible function returns an [`SpStatus`] and writes its result
//! through an out-pointer. On failure a message is available from
//! [`sp_last_error_message`] on the same thread. Objects handed out as
//! pointers are owned by the caller and released with the matching
//! `sp_*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use seqpredict::robustness::MarkoffProfile;
use seqpredict::{
    ActivitySequence, BootstrapOptions, BootstrapResult, EntropyReport, Error, EstimatorMode, SampleSizeConvention,
    SequenceKind,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SequenceTooShort = 3,
    InsufficientReplicates = 4,
    DegenerateVariance = 5,
    TooFewRemaining = 6,
    InvalidRate = 7,
    NoConvergence = 8,
    Internal = 99,
}

impl From<&Error> for SpStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::SequenceTooShort { .. } | Error::NoTransitions | Error::SampleTooSmall(_) => SpStatus::SequenceTooShort,
            Error::InsufficientReplicates { .. } => SpStatus::InsufficientReplicates,
            Error::DegenerateVariance => SpStatus::DegenerateVariance,
            Error::TooFewRemaining { .. } => SpStatus::TooFewRemaining,
            Error::InvalidRate(_) => SpStatus::InvalidRate,
            Error::NoConvergence(_) => SpStatus::NoConvergence,
            _ => SpStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SpStatus>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_last_error("internal panic");
            SpStatus::Internal
        }
    }
}

fn fail(e: Error) -> SpStatus {
    let status = SpStatus::from(&e);
    set_last_error(e.to_string());
    status
}

fn null(what: &str) -> SpStatus {
    set_last_error(format!("{what} is null"));
    SpStatus::NullPointer
}

unsafe fn slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], SpStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SpStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, SpStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque activity sequence.
pub struct SpSequence(ActivitySequence);

/// Builds a sequence from arbitrary integer labels; labels are renumbered
/// densely in order of first appearance.
///
/// # Safety
/// `labels` must point to `len` readable values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_sequence_new(labels: *const u64, len: usize, out: *mut *mut SpSequence) -> SpStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        let labels = unsafe { slice(labels, len, "labels") }?;
        let seq = ActivitySequence::from_labels(labels.iter().copied(), "", SequenceKind::Individual).map_err(fail)?;
        *out = Box::into_raw(Box::new(SpSequence(seq)));
        Ok(())
    })
}

/// # Safety
/// `seq` must come from [`sp_sequence_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sp_sequence_free(seq: *mut SpSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// # Safety
/// `seq` must be a live sequence or null.
#[no_mangle]
pub unsafe extern "C" fn sp_sequence_len(seq: *const SpSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `seq` must be a live sequence or null.
#[no_mangle]
pub unsafe extern "C" fn sp_sequence_alphabet_size(seq: *const SpSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.alphabet_size())
}

/// Entropies in bits. The `*_corrected` fields are meaningful only when
/// `has_corrected` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpEntropyReport {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub mi: f64,
    pub h1_aligned: f64,
    pub mi_aligned: f64,
    pub n: usize,
    pub n_transitions: usize,
    pub alphabet_size: usize,
    pub has_corrected: bool,
    pub h1_corrected: f64,
    pub h2_corrected: f64,
    pub mi_corrected: f64,
    pub mi_aligned_corrected: f64,
}

impl From<&EntropyReport> for SpEntropyReport {
    fn from(r: &EntropyReport) -> Self {
        let mut out = SpEntropyReport {
            h0: r.h0,
            h1: r.h1,
            h2: r.h2,
            mi: r.mi,
            h1_aligned: r.h1_aligned,
            mi_aligned: r.mi_aligned,
            n: r.n,
            n_transitions: r.n_transitions,
            alphabet_size: r.alphabet_size,
            ..Default::default()
        };
        if let Some(c) = &r.corrected {
            out.has_corrected = true;
            out.h1_corrected = c.h1;
            out.h2_corrected = c.h2;
            out.mi_corrected = c.mi;
            out.mi_aligned_corrected = c.mi_aligned;
        }
        out
    }
}

/// Sample size used in the bias terms.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpConvention {
    /// Positions for the marginal term, transitions for the conditional one.
    Split = 0,
    Positions = 1,
    Transitions = 2,
}

impl From<SpConvention> for SampleSizeConvention {
    fn from(c: SpConvention) -> Self {
        match c {
            SpConvention::Split => SampleSizeConvention::Split,
            SpConvention::Positions => SampleSizeConvention::Positions,
            SpConvention::Transitions => SampleSizeConvention::Transitions,
        }
    }
}

/// Plug-in entropies, without bias correction.
///
/// # Safety
/// `seq` must be a live sequence and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_entropy_report(seq: *const SpSequence, out: *mut SpEntropyReport) -> SpStatus {
    guard(|| {
        let (seq, out) = unsafe { (get(seq, "seq")?, self::out(out, "out")?) };
        *out = (&seqpredict::entropy_report(&seq.0).map_err(fail)?).into();
        Ok(())
    })
}

/// Plug-in entropies plus their bias-corrected values.
///
/// # Safety
/// `seq` must be a live sequence and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_corrected_report(
    seq: *const SpSequence,
    convention: SpConvention,
    out: *mut SpEntropyReport,
) -> SpStatus {
    guard(|| {
        let (seq, out) = unsafe { (get(seq, "seq")?, self::out(out, "out")?) };
        *out = (&seqpredict::corrected_report(&seq.0, convention.into()).map_err(fail)?).into();
        Ok(())
    })
}

/// Bias of the marginal entropy for `m_bar` observed states and sample size `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_bias_h1(m_bar: usize, n: usize, out: *mut f64) -> SpStatus {
    guard(|| {
        let out = unsafe { self::out(out, "out") }?;
        *out = seqpredict::bias_h1(m_bar, n).map_err(fail)?;
        Ok(())
    })
}

/// Bias of the conditional entropy; `m_bar_j` holds the successor support of
/// each observed context.
///
/// # Safety
/// `m_bar_j` must point to `len` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_bias_h2(m_bar_j: *const usize, len: usize, n: usize, out: *mut f64) -> SpStatus {
    guard(|| {
        let (m_bar_j, out) = unsafe { (slice(m_bar_j, len, "m_bar_j")?, self::out(out, "out")?) };
        *out = seqpredict::bias_h2(m_bar_j, n).map_err(fail)?;
        Ok(())
    })
}

/// Bias of the mutual information.
///
/// # Safety
/// `m_bar_j` must point to `len` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_bias_mi(
    m_bar: usize,
    m_bar_j: *const usize,
    len: usize,
    n: usize,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let (m_bar_j, out) = unsafe { (slice(m_bar_j, len, "m_bar_j")?, self::out(out, "out")?) };
        *out = seqpredict::bias_mi(m_bar, m_bar_j, n).map_err(fail)?;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpMode {
    /// Marginal entropy over all positions.
    Full = 0,
    /// Marginal entropy over successor positions only.
    Aligned = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpBootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    pub corrected: bool,
    pub mode: SpMode,
    pub convention: SpConvention,
}

impl From<&SpBootstrapOptions> for BootstrapOptions {
    fn from(o: &SpBootstrapOptions) -> Self {
        let mut opts = BootstrapOptions::new(o.seed)
            .replicates(o.replicates)
            .corrected(o.corrected)
            .mode(match o.mode {
                SpMode::Full => EstimatorMode::Full,
                SpMode::Aligned => EstimatorMode::Aligned,
            });
        opts.convention = o.convention.into();
        opts
    }
}

/// Default options: 1000 replicates, bias-corrected, full mode.
#[no_mangle]
pub extern "C" fn sp_bootstrap_options_default(seed: u64) -> SpBootstrapOptions {
    let d = BootstrapOptions::new(seed);
    SpBootstrapOptions {
        replicates: d.replicates,
        seed,
        corrected: d.corrected,
        mode: SpMode::Full,
        convention: SpConvention::Split,
    }
}

/// Opaque shuffle-test result.
pub struct SpBootstrap(BootstrapResult);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpBootstrapSummary {
    pub mi_true: f64,
    pub p025: f64,
    pub p975: f64,
    pub gap: f64,
    pub reject_null: bool,
    pub replicates: usize,
}

impl From<&BootstrapResult> for SpBootstrapSummary {
    fn from(r: &BootstrapResult) -> Self {
        SpBootstrapSummary {
            mi_true: r.mi_true,
            p025: r.p025,
            p975: r.p975,
            gap: r.gap,
            reject_null: r.reject_null,
            replicates: r.r,
        }
    }
}

/// Shuffle test of the mutual information.
///
/// # Safety
/// `seq` and `opts` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_bootstrap(
    seq: *const SpSequence,
    opts: *const SpBootstrapOptions,
    out: *mut *mut SpBootstrap,
) -> SpStatus {
    guard(|| {
        let (seq, opts, out) = unsafe { (get(seq, "seq")?, get(opts, "opts")?, self::out(out, "out")?) };
        let result = seqpredict::bootstrap_mi_test(&seq.0, &opts.into()).map_err(fail)?;
        *out = Box::into_raw(Box::new(SpBootstrap(result)));
        Ok(())
    })
}

/// # Safety
/// `res` must be a live result and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_bootstrap_summary(res: *const SpBootstrap, out: *mut SpBootstrapSummary) -> SpStatus {
    guard(|| {
        let (res, out) = unsafe { (get(res, "res")?, self::out(out, "out")?) };
        *out = (&res.0).into();
        Ok(())
    })
}

/// Copies up to `cap` replicate MI values, in replicate order, into `buf`
/// and returns the total number of replicates.
///
/// # Safety
/// `res` must be a live result; `buf` must have room for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn sp_bootstrap_replicates(res: *const SpBootstrap, buf: *mut f64, cap: usize) -> usize {
    let Some(res) = res.as_ref() else { return 0 };
    let values = &res.0.replicates;
    if !buf.is_null() {
        let k = cap.min(values.len());
        ptr::copy_nonoverlapping(values.as_ptr(), buf, k);
    }
    values.len()
}

/// # Safety
/// `res` must come from [`sp_bootstrap`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sp_bootstrap_free(res: *mut SpBootstrap) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Opaque mark-off sweep.
pub struct SpMarkoff(MarkoffProfile);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpMarkoffPoint {
    pub rate: f64,
    pub retained: usize,
    pub summary: SpBootstrapSummary,
}

/// Random-deletion sweep over strictly increasing `rates`.
///
/// # Safety
/// `rates` must point to `len` values; `seq`, `opts` valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_markoff_sweep(
    seq: *const SpSequence,
    rates: *const f64,
    len: usize,
    opts: *const SpBootstrapOptions,
    out: *mut *mut SpMarkoff,
) -> SpStatus {
    guard(|| {
        let (seq, rates, opts, out) =
            unsafe { (get(seq, "seq")?, slice(rates, len, "rates")?, get(opts, "opts")?, self::out(out, "out")?) };
        let profile = seqpredict::markoff_sweep(&seq.0, rates, &opts.into()).map_err(fail)?;
        *out = Box::into_raw(Box::new(SpMarkoff(profile)));
        Ok(())
    })
}

/// # Safety
/// `profile` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn sp_markoff_len(profile: *const SpMarkoff) -> usize {
    profile.as_ref().map_or(0, |p| p.0.points.len())
}

/// # Safety
/// `profile` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_markoff_point(profile: *const SpMarkoff, index: usize, out: *mut SpMarkoffPoint) -> SpStatus {
    guard(|| {
        let (profile, out) = unsafe { (get(profile, "profile")?, self::out(out, "out")?) };
        let p = profile.0.points.get(index).ok_or_else(|| {
            set_last_error(format!("index {index} out of range"));
            SpStatus::InvalidArgument
        })?;
        *out = SpMarkoffPoint {
            rate: p.rate,
            retained: p.retained,
            summary: (&p.result).into(),
        };
        Ok(())
    })
}

/// Writes the first rate at which the test stops rejecting. Returns false,
/// leaving `out` untouched, when every rate rejects.
///
/// # Safety
/// `profile` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_markoff_critical_rate(profile: *const SpMarkoff, out: *mut f64) -> bool {
    match (profile.as_ref().and_then(|p| p.0.critical_rate), out.as_mut()) {
        (Some(rate), Some(out)) => {
            *out = rate;
            true
        }
        _ => false,
    }
}

/// # Safety
/// `profile` must come from [`sp_markoff_sweep`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sp_markoff_free(profile: *mut SpMarkoff) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SpTTest {
    pub t_stat: f64,
    pub df: f64,
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

/// Two-sided two-sample t-test; `welch` selects unequal variances.
///
/// # Safety
/// `a` and `b` must point to `len_a` and `len_b` values; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sp_t_test(
    a: *const f64,
    len_a: usize,
    b: *const f64,
    len_b: usize,
    welch: bool,
    out: *mut SpTTest,
) -> SpStatus {
    guard(|| {
        let (a, b, out) = unsafe { (slice(a, len_a, "a")?, slice(b, len_b, "b")?, self::out(out, "out")?) };
        let kind = if welch {
            seqpredict::TTestKind::Welch
        } else {
            seqpredict::TTestKind::Pooled
        };
        let t = seqpredict::significance::t_test(a, b, kind).map_err(fail)?;
        *out = SpTTest {
            t_stat: t.t_stat,
            df: t.df,
            p_value: t.p_value,
            mean_a: t.mean_a,
            mean_b: t.mean_b,
        };
        Ok(())
    })
}
