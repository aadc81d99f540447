//! Panzeri-Treves leading-order bias terms for plug-in entropies.
//!
//! Plug-in entropies are biased downward by roughly `(M - 1) / (2 N ln 2)`
//! bits, where `M` is the number of states with nonzero probability and `N`
//! the number of observations. The conditional entropy collects one such
//! term per observed context. State counts are the naive observed supports.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{
    fit_models, report_from_models, ActivitySequence, BigramModel, CorrectedEntropies, EntropyReport,
    UnigramModel,
};

/// Which observation count stands in for `N` in each bias term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSizeConvention {
    /// `n` for the marginal term, `n - 1` for the conditional and MI terms.
    #[default]
    Split,
    /// `n` everywhere.
    Positions,
    /// `n - 1` everywhere.
    Transitions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTerms {
    pub bias_h1: f64,
    pub bias_h2: f64,
    pub bias_mi: f64,
    pub m_bar: usize,
    pub m_bar_j: Vec<usize>,
    pub n_h1: usize,
    pub n_h2: usize,
    /// Sequence length and transition count the terms were computed from.
    pub seq_len: usize,
    pub transitions: usize,
}

fn prefactor(n: usize) -> f64 {
    1.0 / (2.0 * n as f64 * LN_2)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidCount("observation count must be positive".into()));
    }
    Ok(())
}

fn excess_states(m_bar_j: &[usize]) -> Result<usize> {
    m_bar_j.iter().try_fold(0usize, |acc, &m| {
        if m == 0 {
            Err(Error::InvalidCount("per-context state count must be positive".into()))
        } else {
            Ok(acc + (m - 1))
        }
    })
}

/// Bias of the marginal entropy: `-(M - 1) / (2 N ln 2)`.
pub fn bias_h1(m_bar: usize, n: usize) -> Result<f64> {
    check_n(n)?;
    if m_bar == 0 {
        return Err(Error::InvalidCount("state count must be positive".into()));
    }
    Ok(-prefactor(n) * (m_bar - 1) as f64)
}

/// Bias of the conditional entropy: `-sum_j (M_j - 1) / (2 N ln 2)` over
/// observed contexts.
pub fn bias_h2(m_bar_j: &[usize], n: usize) -> Result<f64> {
    check_n(n)?;
    Ok(-prefactor(n) * excess_states(m_bar_j)? as f64)
}

/// Bias of the mutual information, `bias_h1 - bias_h2` at a common `N`.
pub fn bias_mi(m_bar: usize, m_bar_j: &[usize], n: usize) -> Result<f64> {
    check_n(n)?;
    if m_bar == 0 {
        return Err(Error::InvalidCount("state count must be positive".into()));
    }
    let diff = excess_states(m_bar_j)? as f64 - (m_bar - 1) as f64;
    Ok(prefactor(n) * diff)
}

impl BiasTerms {
    pub fn from_models(
        unigram: &UnigramModel,
        bigram: &BigramModel,
        convention: SampleSizeConvention,
    ) -> Result<Self> {
        let seq_len = unigram.total() as usize;
        let transitions = bigram.total() as usize;
        let (n_h1, n_h2) = match convention {
            SampleSizeConvention::Split => (seq_len, transitions),
            SampleSizeConvention::Positions => (seq_len, seq_len),
            SampleSizeConvention::Transitions => (transitions, transitions),
        };
        let m_bar = unigram.support();
        let m_bar_j = bigram.successor_support();
        Ok(BiasTerms {
            bias_h1: bias_h1(m_bar, n_h1)?,
            bias_h2: bias_h2(&m_bar_j, n_h2)?,
            bias_mi: bias_mi(m_bar, &m_bar_j, n_h2)?,
            m_bar,
            m_bar_j,
            n_h1,
            n_h2,
            seq_len,
            transitions,
        })
    }

    pub fn from_sequence(seq: &ActivitySequence, convention: SampleSizeConvention) -> Result<Self> {
        let (unigram, bigram) = fit_models(seq)?;
        Self::from_models(&unigram, &bigram, convention)
    }
}

/// Subtracts the bias terms from the raw estimates.
///
/// With `clamp` set, corrected `h2` and both MI values are limited to
/// `[0, corrected h1]`; otherwise values are reported as computed.
pub fn apply_correction(report: &EntropyReport, terms: &BiasTerms, clamp: bool) -> Result<EntropyReport> {
    if terms.seq_len != report.n || terms.transitions != report.n_transitions {
        return Err(Error::MismatchedProvenance(format!(
            "report has n={} transitions={}, terms have n={} transitions={}",
            report.n, report.n_transitions, terms.seq_len, terms.transitions
        )));
    }
    if terms.m_bar != report.alphabet_size {
        return Err(Error::MismatchedProvenance(format!(
            "report alphabet {} but terms count {} states",
            report.alphabet_size, terms.m_bar
        )));
    }
    let h1 = report.h1 - terms.bias_h1;
    let mut h2 = report.h2 - terms.bias_h2;
    let mut mi = report.mi - terms.bias_mi;
    let mut mi_aligned = report.mi_aligned - terms.bias_mi;
    let mi_exceeds_h1 = mi > h1;
    let mut clamped = false;
    if clamp {
        let upper = h1.max(0.0);
        for v in [&mut h2, &mut mi, &mut mi_aligned] {
            let c = v.clamp(0.0, upper);
            if c != *v {
                *v = c;
                clamped = true;
            }
        }
    }
    let mut out = report.clone();
    out.corrected = Some(CorrectedEntropies {
        h1,
        h2,
        mi,
        mi_aligned,
        mi_exceeds_h1,
        clamped,
    });
    Ok(out)
}

/// Raw report plus unclamped bias-corrected values.
pub fn corrected_report(seq: &ActivitySequence, convention: SampleSizeConvention) -> Result<EntropyReport> {
    let (unigram, bigram) = fit_models(seq)?;
    let report = report_from_models(&unigram, &bigram)?;
    let terms = BiasTerms::from_models(&unigram, &bigram, convention)?;
    apply_correction(&report, &terms, false)
}
