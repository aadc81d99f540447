//! Permutation-bootstrap test for mutual information, the gap statistic, and
//! two-sample t-tests for comparing gap populations.
//!
//! Shuffling a sequence keeps its unigram counts, so the full-mode marginal
//! entropy of every replicate is bit-identical to the original; only the
//! conditional entropy moves. The null is rejected one-sided, when the true MI
//! lies strictly above the 97.5% replicate percentile (nominal level 2.5%).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bias::{apply_correction, BiasTerms, SampleSizeConvention};
use crate::error::{Error, Result};
use crate::histogram::{finite_range, Histogram};
use crate::sequence::{fit_models, report_from_models, ActivitySequence, EntropyReport, EstimatorMode};

pub const DEFAULT_REPLICATES: usize = 1000;
pub const MIN_REPLICATES: usize = 40;

/// RNG for replicate `index` of a run keyed by `master`: the master seed picks
/// the key and the index picks an independent ChaCha stream.
pub fn replicate_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Uniform random permutation of the states, deterministic in `seed`.
pub fn shuffle_sequence(seq: &ActivitySequence, seed: u64) -> Result<ActivitySequence> {
    shuffle_with(seq, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn shuffle_with(seq: &ActivitySequence, rng: &mut ChaCha8Rng) -> Result<ActivitySequence> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort { needed: 2, got: seq.len() });
    }
    let mut states = seq.states().to_vec();
    states.shuffle(rng);
    Ok(seq.derive(states))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub seed: u64,
    /// Test on bias-corrected MI.
    pub corrected: bool,
    pub mode: EstimatorMode,
    pub convention: SampleSizeConvention,
}

impl BootstrapOptions {
    pub fn new(seed: u64) -> Self {
        BootstrapOptions {
            replicates: DEFAULT_REPLICATES,
            seed,
            corrected: true,
            mode: EstimatorMode::Full,
            convention: SampleSizeConvention::Split,
        }
    }

    pub fn replicates(mut self, r: usize) -> Self {
        self.replicates = r;
        self
    }

    pub fn corrected(mut self, corrected: bool) -> Self {
        self.corrected = corrected;
        self
    }

    pub fn mode(mut self, mode: EstimatorMode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mi_true: f64,
    /// Replicate MI values in replicate-index order.
    pub replicates: Vec<f64>,
    pub p025: f64,
    pub p975: f64,
    pub reject_null: bool,
    pub gap: f64,
    pub seed: u64,
    pub r: usize,
    pub corrected: bool,
    pub mode: EstimatorMode,
}

fn analyze(seq: &ActivitySequence, corrected: bool, convention: SampleSizeConvention) -> Result<EntropyReport> {
    let (unigram, bigram) = fit_models(seq)?;
    let report = report_from_models(&unigram, &bigram)?;
    if corrected {
        let terms = BiasTerms::from_models(&unigram, &bigram, convention)?;
        apply_correction(&report, &terms, false)
    } else {
        Ok(report)
    }
}

fn check_replicates(r: usize) -> Result<()> {
    if r < MIN_REPLICATES {
        return Err(Error::InsufficientReplicates { needed: MIN_REPLICATES, got: r });
    }
    Ok(())
}

/// Entropy reports of every shuffled replicate, in replicate order.
pub fn replicate_reports(seq: &ActivitySequence, opts: &BootstrapOptions) -> Result<Vec<EntropyReport>> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort { needed: 2, got: seq.len() });
    }
    (0..opts.replicates as u64)
        .into_par_iter()
        .map(|k| {
            let shuffled = shuffle_with(seq, &mut replicate_rng(opts.seed, k))?;
            analyze(&shuffled, opts.corrected, opts.convention)
        })
        .collect()
}

/// Nearest-rank percentile of sorted data for `per_mille / 1000`: the element
/// at 1-based rank `ceil(q * len)`.
pub fn nearest_rank(sorted: &[f64], per_mille: usize) -> f64 {
    let rank = (per_mille * sorted.len()).div_ceil(1000).max(1);
    sorted[rank - 1]
}

/// Shuffle test of the sequence's mutual information against `R` permutations.
pub fn bootstrap_mi_test(seq: &ActivitySequence, opts: &BootstrapOptions) -> Result<BootstrapResult> {
    if seq.len() < 2 {
        return Err(Error::SequenceTooShort { needed: 2, got: seq.len() });
    }
    check_replicates(opts.replicates)?;
    let mi_true = analyze(seq, opts.corrected, opts.convention)?.mi_for(opts.mode, opts.corrected);
    let replicates: Vec<f64> = replicate_reports(seq, opts)?
        .iter()
        .map(|r| r.mi_for(opts.mode, opts.corrected))
        .collect();
    let mut sorted = replicates.clone();
    sorted.sort_by(f64::total_cmp);
    let p025 = nearest_rank(&sorted, 25);
    let p975 = nearest_rank(&sorted, 975);
    Ok(BootstrapResult {
        mi_true,
        replicates,
        p025,
        p975,
        reject_null: mi_true > p975,
        gap: mi_true - p975,
        seed: opts.seed,
        r: opts.replicates,
        corrected: opts.corrected,
        mode: opts.mode,
    })
}

/// Distance of the true MI above the upper shuffle band.
pub fn gap_statistic(result: &BootstrapResult) -> f64 {
    result.mi_true - result.p975
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TTestKind {
    /// Equal-variance Student test.
    #[default]
    Pooled,
    Welch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub kind: TTestKind,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

fn two_sided_p(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Two-sample t-test of equal means.
pub fn t_test(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TTestResult> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::SampleTooSmall(s.len()));
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let (se, df) = match kind {
        TTestKind::Pooled => {
            let pooled = ((na - 1.0) * var_a + (nb - 1.0) * var_b) / (na + nb - 2.0);
            if pooled == 0.0 {
                return Err(Error::DegenerateVariance);
            }
            ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), na + nb - 2.0)
        }
        TTestKind::Welch => {
            let (sa, sb) = (var_a / na, var_b / nb);
            if sa + sb == 0.0 {
                return Err(Error::DegenerateVariance);
            }
            let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
            ((sa + sb).sqrt(), df)
        }
    };
    let t_stat = (mean_a - mean_b) / se;
    Ok(TTestResult {
        t_stat,
        df,
        p_value: two_sided_p(t_stat, df),
        mean_a,
        mean_b,
        n_a: a.len(),
        n_b: b.len(),
        kind,
    })
}

/// Equal-variance two-sample t-test.
pub fn pooled_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    t_test(a, b, TTestKind::Pooled)
}

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub ttest: TTestResult,
    pub mean_individual: f64,
    pub mean_group: f64,
    pub hist_individual: Histogram,
    pub hist_group: Histogram,
    pub reject_equal_means: bool,
    pub verdict: String,
}

/// Compares individual-activity gaps against group-activity gaps.
/// Histograms share one range so their densities are directly comparable.
pub fn compare_groups(
    gaps_individual: &[f64],
    gaps_group: &[f64],
    kind: TTestKind,
    bins: usize,
) -> Result<GroupComparison> {
    let ttest = t_test(gaps_individual, gaps_group, kind)?;
    let all: Vec<f64> = gaps_individual.iter().chain(gaps_group).copied().collect();
    let range = finite_range(&all);
    let reject = ttest.p_value < SIGNIFICANCE_LEVEL;
    let verdict = match (reject, ttest.mean_a > ttest.mean_b) {
        (false, _) => format!(
            "no significant difference in mean gap (p = {:.3e} >= {SIGNIFICANCE_LEVEL})",
            ttest.p_value
        ),
        (true, true) => format!(
            "individual activity is more predictable than group activity (p = {:.3e})",
            ttest.p_value
        ),
        (true, false) => format!(
            "group activity is more predictable than individual activity (p = {:.3e})",
            ttest.p_value
        ),
    };
    Ok(GroupComparison {
        mean_individual: ttest.mean_a,
        mean_group: ttest.mean_b,
        hist_individual: Histogram::new(gaps_individual, bins, Some(range)),
        hist_group: Histogram::new(gaps_group, bins, Some(range)),
        reject_equal_means: reject,
        verdict,
        ttest,
    })
}
