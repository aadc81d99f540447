//! Activity sequences and the plug-in entropy quantities computed from them.
//!
//! Entropies are in bits. Two estimator modes are reported side by side:
//!
//! * **full mode** (`h1`, `mi`): the marginal entropy uses all `n` positions
//!   while the conditional entropy uses the `n - 1` adjacent pairs. On short
//!   sequences this can make `mi = h1 - h2` slightly negative.
//! * **aligned mode** (`h1_aligned`, `mi_aligned`): the marginal is taken over
//!   the successor positions `2..=n`, so marginal and conditional come from the
//!   same bigram sample and `mi_aligned >= 0`.
//!
//! The conditional entropy is the standard `H(next | current)`, weighting
//! each context's successor entropy by how often the context occurs.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether a sequence holds a user's solo activity, group activity, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Individual,
    Group,
    Mixed,
}

impl SequenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SequenceKind::Individual => "individual",
            SequenceKind::Group => "group",
            SequenceKind::Mixed => "mixed",
        }
    }
}

impl std::fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A chronologically ordered sequence of dense state ids `0..M`.
///
/// Every id below `alphabet_size` occurs at least once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivitySequence {
    states: Vec<u32>,
    alphabet_size: usize,
    source_user: String,
    kind: SequenceKind,
}

impl ActivitySequence {
    /// Builds a sequence from already dense state ids.
    ///
    /// Fails if the sequence is empty or some id in `0..=max` never occurs.
    pub fn new(states: Vec<u32>, source_user: impl Into<String>, kind: SequenceKind) -> Result<Self> {
        let Some(&max) = states.iter().max() else {
            return Err(Error::InvalidSequence("empty sequence".into()));
        };
        let alphabet_size = max as usize + 1;
        let mut seen = vec![false; alphabet_size];
        for &s in &states {
            seen[s as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|&b| !b) {
            return Err(Error::InvalidSequence(format!(
                "state ids are not dense: {missing} is missing below {max}"
            )));
        }
        Ok(ActivitySequence {
            states,
            alphabet_size,
            source_user: source_user.into(),
            kind,
        })
    }

    /// Relabels arbitrary labels to dense ids in order of first appearance.
    pub fn from_labels<T, I>(labels: I, source_user: impl Into<String>, kind: SequenceKind) -> Result<Self>
    where
        T: Hash + Eq,
        I: IntoIterator<Item = T>,
    {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let mut states = Vec::new();
        for label in labels {
            let next = ids.len() as u32;
            states.push(*ids.entry(label).or_insert(next));
        }
        if states.is_empty() {
            return Err(Error::InvalidSequence("empty sequence".into()));
        }
        Ok(ActivitySequence {
            alphabet_size: ids.len(),
            states,
            source_user: source_user.into(),
            kind,
        })
    }

    /// Builds a sequence from arbitrary integer ids, compacting them
    /// monotonically to `0..M` (ids that already are dense are unchanged).
    pub fn from_ids(states: Vec<u32>, source_user: impl Into<String>, kind: SequenceKind) -> Result<Self> {
        let Some(&max) = states.iter().max() else {
            return Err(Error::InvalidSequence("empty sequence".into()));
        };
        let template = ActivitySequence {
            states: Vec::new(),
            alphabet_size: max as usize + 1,
            source_user: source_user.into(),
            kind,
        };
        Ok(template.derive(states))
    }

    /// Same user and kind, new states. Ids are compacted monotonically, so the
    /// relative order of surviving ids is kept.
    pub(crate) fn derive(&self, states: Vec<u32>) -> Self {
        let mut present = vec![false; self.alphabet_size];
        for &s in &states {
            present[s as usize] = true;
        }
        let (states, alphabet_size) = if present.iter().all(|&b| b) {
            (states, self.alphabet_size)
        } else {
            let mut remap = vec![u32::MAX; self.alphabet_size];
            let mut next = 0u32;
            for (old, _) in present.iter().enumerate().filter(|(_, &p)| p) {
                remap[old] = next;
                next += 1;
            }
            (states.into_iter().map(|s| remap[s as usize]).collect(), next as usize)
        };
        ActivitySequence {
            states,
            alphabet_size,
            source_user: self.source_user.clone(),
            kind: self.kind,
        }
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn source_user(&self) -> &str {
        &self.source_user
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: SequenceKind) -> Self {
        self.kind = kind;
        self
    }
}

/// Occurrence counts of each state over all positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnigramModel {
    counts: Vec<u64>,
    total: u64,
    probs: Vec<f64>,
}

impl UnigramModel {
    fn from_counts(counts: Vec<u64>) -> Self {
        let total: u64 = counts.iter().sum();
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        UnigramModel { counts, total, probs }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of states observed at least once.
    pub fn support(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

/// Transition counts `c(j -> i)` over the `n - 1` adjacent pairs, stored as
/// sparse rows keyed by context `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigramModel {
    alphabet_size: usize,
    rows: Vec<Vec<(u32, u64)>>,
    context_counts: Vec<u64>,
    total: u64,
}

impl BigramModel {
    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Total number of transitions, `n - 1`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `c(j)`: how often `j` occurs as the earlier element of a pair.
    pub fn context_counts(&self) -> &[u64] {
        &self.context_counts
    }

    /// Observed successors of `context` with their counts, ascending by id.
    pub fn row(&self, context: usize) -> &[(u32, u64)] {
        &self.rows[context]
    }

    pub fn count(&self, context: usize, next: usize) -> u64 {
        self.rows[context]
            .binary_search_by_key(&(next as u32), |&(i, _)| i)
            .map(|k| self.rows[context][k].1)
            .unwrap_or(0)
    }

    /// `p(next | context)`, or `None` when the context was never observed.
    pub fn conditional_prob(&self, context: usize, next: usize) -> Option<f64> {
        let c = self.context_counts[context];
        (c > 0).then(|| self.count(context, next) as f64 / c as f64)
    }

    /// Counts of each state as the later element of a pair (positions `2..=n`).
    pub fn successor_counts(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.alphabet_size];
        for row in &self.rows {
            for &(i, c) in row {
                out[i as usize] += c;
            }
        }
        out
    }

    /// Number of distinct successors per observed context. Unobserved contexts
    /// are skipped.
    pub fn successor_support(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| !r.is_empty())
            .map(|r| r.len())
            .collect()
    }
}

// Dense scratch is used while M^2 stays small relative to the sequence.
const DENSE_CELL_LIMIT: usize = 1 << 16;

/// Tallies unigram and bigram counts.
pub fn fit_models(seq: &ActivitySequence) -> Result<(UnigramModel, BigramModel)> {
    let states = seq.states();
    if states.len() < 2 {
        return Err(Error::SequenceTooShort { needed: 2, got: states.len() });
    }
    let m = seq.alphabet_size();

    let mut counts = vec![0u64; m];
    for &s in states {
        counts[s as usize] += 1;
    }

    let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); m];
    let mut context_counts = vec![0u64; m];
    if m.saturating_mul(m) <= DENSE_CELL_LIMIT.max(16 * states.len()) {
        let mut dense = vec![0u64; m * m];
        for w in states.windows(2) {
            dense[w[0] as usize * m + w[1] as usize] += 1;
        }
        for (j, row) in rows.iter_mut().enumerate() {
            for (i, &c) in dense[j * m..(j + 1) * m].iter().enumerate() {
                if c > 0 {
                    row.push((i as u32, c));
                    context_counts[j] += c;
                }
            }
        }
    } else {
        let mut codes: Vec<u64> = states
            .windows(2)
            .map(|w| ((w[0] as u64) << 32) | w[1] as u64)
            .collect();
        codes.sort_unstable();
        for chunk in codes.chunk_by(|a, b| a == b) {
            let j = (chunk[0] >> 32) as usize;
            let i = (chunk[0] & 0xffff_ffff) as u32;
            rows[j].push((i, chunk.len() as u64));
            context_counts[j] += chunk.len() as u64;
        }
    }

    let bigram = BigramModel {
        alphabet_size: m,
        rows,
        context_counts,
        total: (states.len() - 1) as u64,
    };
    Ok((UnigramModel::from_counts(counts), bigram))
}

/// `log2 M`, the entropy of a uniform distribution over `M` states.
pub fn max_entropy(alphabet_size: usize) -> Result<f64> {
    if alphabet_size < 1 {
        return Err(Error::InvalidAlphabet(alphabet_size));
    }
    Ok((alphabet_size as f64).log2())
}

/// Shannon entropy in bits of a count vector. Zero counts contribute nothing.
pub(crate) fn entropy_of_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / n;
            h -= p * p.log2();
        }
    }
    h
}

/// Plug-in entropy of the marginal state distribution.
pub fn plugin_entropy(model: &UnigramModel) -> f64 {
    entropy_of_counts(&model.counts)
}

/// Plug-in conditional entropy `H(next | current)`.
pub fn conditional_entropy(model: &BigramModel) -> Result<f64> {
    if model.total == 0 {
        return Err(Error::NoTransitions);
    }
    let n2 = model.total as f64;
    let mut h = 0.0;
    for (row, &cj) in model.rows.iter().zip(&model.context_counts) {
        if cj == 0 {
            continue;
        }
        let cj_f = cj as f64;
        let mut hj = 0.0;
        for &(_, c) in row {
            let p = c as f64 / cj_f;
            hj -= p * p.log2();
        }
        h += (cj_f / n2) * hj;
    }
    Ok(h)
}

pub fn mutual_information(h1: f64, h2: f64) -> f64 {
    h1 - h2
}

/// Bias-corrected estimates attached to an [`EntropyReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectedEntropies {
    pub h1: f64,
    pub h2: f64,
    pub mi: f64,
    /// Corrected aligned-mode MI.
    pub mi_aligned: f64,
    /// Set when the corrected MI exceeds the corrected marginal entropy.
    pub mi_exceeds_h1: bool,
    /// Set when values were clamped into `[0, h1]`.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub mi: f64,
    pub h1_aligned: f64,
    pub mi_aligned: f64,
    pub n: usize,
    pub n_transitions: usize,
    pub alphabet_size: usize,
    pub corrected: Option<CorrectedEntropies>,
}

impl EntropyReport {
    /// MI in the requested mode, bias-corrected when asked and available.
    pub fn mi_for(&self, mode: EstimatorMode, corrected: bool) -> f64 {
        match (mode, corrected.then_some(self.corrected).flatten()) {
            (EstimatorMode::Full, Some(c)) => c.mi,
            (EstimatorMode::Aligned, Some(c)) => c.mi_aligned,
            (EstimatorMode::Full, None) => self.mi,
            (EstimatorMode::Aligned, None) => self.mi_aligned,
        }
    }
}

/// Which marginal the mutual information is measured against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorMode {
    /// Marginal over all `n` positions.
    #[default]
    Full,
    /// Marginal over the successor positions only.
    Aligned,
}

pub fn report_from_models(unigram: &UnigramModel, bigram: &BigramModel) -> Result<EntropyReport> {
    let m = unigram.counts.len();
    let h0 = max_entropy(m)?;
    let h1 = plugin_entropy(unigram);
    let h2 = conditional_entropy(bigram)?;
    let h1_aligned = entropy_of_counts(&bigram.successor_counts());
    Ok(EntropyReport {
        h0,
        h1,
        h2,
        mi: mutual_information(h1, h2),
        h1_aligned,
        mi_aligned: mutual_information(h1_aligned, h2),
        n: unigram.total as usize,
        n_transitions: bigram.total as usize,
        alphabet_size: m,
        corrected: None,
    })
}

/// Raw (uncorrected) entropy report for one sequence.
pub fn entropy_report(seq: &ActivitySequence) -> Result<EntropyReport> {
    let (unigram, bigram) = fit_models(seq)?;
    report_from_models(&unigram, &bigram)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(raw: &[u32]) -> ActivitySequence {
        ActivitySequence::from_labels(raw.iter().copied(), "u", SequenceKind::Individual).unwrap()
    }

    #[test]
    fn fit_models_alternating() {
        let (uni, bi) = fit_models(&seq(&[1, 2, 1, 2, 1, 2])).unwrap();
        assert_eq!(uni.counts(), &[3, 3]);
        assert_eq!(bi.count(0, 1), 3);
        assert_eq!(bi.count(1, 0), 2);
        assert_eq!(bi.count(0, 0), 0);
        assert_eq!(bi.total(), 5);
        assert_eq!(bi.context_counts().iter().sum::<u64>(), bi.total());
    }

    #[test]
    fn fit_models_short() {
        let (uni, bi) = fit_models(&seq(&[1, 1, 2])).unwrap();
        assert_eq!(uni.counts(), &[2, 1]);
        assert_eq!(bi.count(0, 0), 1);
        assert_eq!(bi.count(0, 1), 1);
        assert_eq!(bi.context_counts(), &[2, 0]);
        assert_eq!(bi.conditional_prob(1, 0), None);
    }

    #[test]
    fn fit_models_rejects_single_state() {
        assert_eq!(
            fit_models(&seq(&[7])).unwrap_err(),
            Error::SequenceTooShort { needed: 2, got: 1 }
        );
    }

    #[test]
    fn sparse_path_matches_dense_path() {
        // 400 distinct states over 500 positions forces the sorted-code path.
        let raw: Vec<u32> = (0..500u32).map(|k| (k * 7919) % 400).collect();
        let s = seq(&raw);
        assert!(s.alphabet_size() * s.alphabet_size() > DENSE_CELL_LIMIT.max(16 * s.len()));
        let (_, bi) = fit_models(&s).unwrap();
        let mut dense = HashMap::new();
        for w in s.states().windows(2) {
            *dense.entry((w[0], w[1])).or_insert(0u64) += 1;
        }
        for (&(j, i), &c) in &dense {
            assert_eq!(bi.count(j as usize, i as usize), c);
        }
        let stored: u64 = (0..s.alphabet_size()).flat_map(|j| bi.row(j).iter().map(|r| r.1)).sum();
        assert_eq!(stored, 499);
    }

    #[test]
    fn max_entropy_values() {
        assert_eq!(max_entropy(1).unwrap(), 0.0);
        assert_eq!(max_entropy(2).unwrap(), 1.0);
        assert!((max_entropy(5).unwrap() - 2.321928).abs() < 1e-6);
        assert_eq!(max_entropy(0).unwrap_err(), Error::InvalidAlphabet(0));
    }

    #[test]
    fn plugin_entropy_values() {
        let (uni, _) = fit_models(&seq(&[0, 1])).unwrap();
        assert_eq!(plugin_entropy(&uni), 1.0);
        let (uni, _) = fit_models(&seq(&[3, 3, 3])).unwrap();
        assert_eq!(plugin_entropy(&uni), 0.0);
        let (uni, _) = fit_models(&seq(&[0, 0, 1])).unwrap();
        assert!((plugin_entropy(&uni) - 0.918296).abs() < 1e-6);
    }

    #[test]
    fn conditional_entropy_values() {
        let (_, bi) = fit_models(&seq(&[1, 2, 1, 2, 1, 2])).unwrap();
        assert_eq!(conditional_entropy(&bi).unwrap(), 0.0);
        let (_, bi) = fit_models(&seq(&[1, 1, 2])).unwrap();
        assert_eq!(conditional_entropy(&bi).unwrap(), 1.0);
    }

    #[test]
    fn mutual_information_values() {
        assert_eq!(mutual_information(1.0, 0.0), 1.0);
        assert_eq!(mutual_information(1.0, 1.0), 0.0);
        assert!((mutual_information(0.918296, 1.0) + 0.081704).abs() < 1e-9);
    }

    #[test]
    fn report_examples() {
        let r = entropy_report(&seq(&[1, 2, 1, 2, 1, 2])).unwrap();
        assert_eq!((r.h0, r.h1, r.h2, r.mi), (1.0, 1.0, 0.0, 1.0));

        let r = entropy_report(&seq(&[1, 1, 1, 1])).unwrap();
        assert_eq!((r.h0, r.h1, r.h2, r.mi), (0.0, 0.0, 0.0, 0.0));

        let r = entropy_report(&seq(&[1, 1, 2])).unwrap();
        assert_eq!(r.h0, 1.0);
        assert!((r.h1 - 0.918296).abs() < 1e-6);
        assert_eq!(r.h2, 1.0);
        assert!((r.mi + 0.081704).abs() < 1e-6);
        assert_eq!(r.mi_aligned, 0.0);
        assert_eq!((r.n, r.n_transitions, r.alphabet_size), (3, 2, 2));
    }

    #[test]
    fn two_state_sequence_is_allowed() {
        let r = entropy_report(&seq(&[4, 9])).unwrap();
        assert_eq!(r.h2, 0.0);
        assert_eq!(r.h1, 1.0);
    }

    #[test]
    fn new_rejects_gaps() {
        assert!(ActivitySequence::new(vec![0, 2], "u", SequenceKind::Mixed).is_err());
        assert!(ActivitySequence::new(vec![], "u", SequenceKind::Mixed).is_err());
        let s = ActivitySequence::new(vec![1, 0, 1], "u", SequenceKind::Mixed).unwrap();
        assert_eq!(s.alphabet_size(), 2);
    }

    #[test]
    fn from_labels_relabels_by_first_appearance() {
        let s = ActivitySequence::from_labels(["B", "A", "A", "C"], "u", SequenceKind::Mixed).unwrap();
        assert_eq!(s.states(), &[0, 1, 1, 2]);
        assert_eq!(s.alphabet_size(), 3);
    }

    #[test]
    fn derive_compacts_monotonically() {
        let s = seq(&[0, 1, 2, 1]);
        let d = s.derive(vec![0, 2, 2]);
        assert_eq!(d.states(), &[0, 1, 1]);
        assert_eq!(d.alphabet_size(), 2);
    }

    #[test]
    fn repeated_cycle_converges_to_transition_entropy() {
        // cycle 0 -> 1 -> 2 -> 0 has zero transition entropy
        let base = [0u32, 1, 2];
        let short = entropy_report(&seq(&base)).unwrap();
        let long: Vec<u32> = base.iter().cycle().take(3 * 500).copied().collect();
        let long_r = entropy_report(&seq(&long)).unwrap();
        assert_eq!(short.h1, long_r.h1);
        assert_eq!(long_r.h2, 0.0);
    }
}
