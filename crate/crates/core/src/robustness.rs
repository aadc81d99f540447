//! Mark-off analysis: hide a random fraction of a sequence, keep the rest in
//! chronological order, and rerun the shuffle test on what remains.
//!
//! Deleting a position splices its neighbours into a new adjacent pair; no
//! attempt is made to account for the artificial adjacency.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::{derive_seed, DOMAIN_MARKOFF};
use crate::sequence::ActivitySequence;
use crate::significance::{bootstrap_mi_test, BootstrapOptions, BootstrapResult};

/// Rates `0.0, 0.1, ..., 0.9`.
pub fn default_rates() -> Vec<f64> {
    (0..10).map(|k| k as f64 / 10.0).collect()
}

/// Number of positions kept at `rate`: `round((1 - rate) * n)`.
pub fn retained_len(n: usize, rate: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidRate(rate));
    }
    Ok(((1.0 - rate) * n as f64).round() as usize)
}

/// Sorted positions that survive mark-off at `rate`, chosen uniformly
/// without replacement.
pub fn retained_positions(n: usize, rate: f64, seed: u64) -> Result<Vec<usize>> {
    let keep = retained_len(n, rate)?;
    if keep < 2 {
        return Err(Error::TooFewRemaining { retained: keep });
    }
    if keep == n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, keep).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Randomly hides a fraction `rate` of the sequence. Surviving state ids are
/// compacted monotonically if some state disappears entirely.
pub fn mark_off(seq: &ActivitySequence, rate: f64, seed: u64) -> Result<ActivitySequence> {
    let positions = retained_positions(seq.len(), rate, seed)?;
    if positions.len() == seq.len() {
        return Ok(seq.clone());
    }
    let states = seq.states();
    Ok(seq.derive(positions.iter().map(|&p| states[p]).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkoffPoint {
    pub rate: f64,
    pub retained: usize,
    pub result: BootstrapResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkoffProfile {
    pub rates: Vec<f64>,
    pub points: Vec<MarkoffPoint>,
    /// Smallest tested rate at which the null is no longer rejected.
    pub critical_rate: Option<f64>,
}

/// Seed used to pick the retained positions at the `index`-th rate of a sweep.
pub fn markoff_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, DOMAIN_MARKOFF, index as u64)
}

/// Runs mark-off followed by the shuffle test at each rate.
///
/// Every rate's bootstrap uses `opts.seed` directly, so rate 0 reproduces
/// [`bootstrap_mi_test`] on the unmodified sequence exactly.
pub fn markoff_sweep(seq: &ActivitySequence, rates: &[f64], opts: &BootstrapOptions) -> Result<MarkoffProfile> {
    if rates.is_empty() {
        return Err(Error::InvalidConfig("no mark-off rates given".into()));
    }
    if let Some(w) = rates.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!(
            "mark-off rates must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    let mut points = Vec::with_capacity(rates.len());
    for (k, &rate) in rates.iter().enumerate() {
        let retained = mark_off(seq, rate, markoff_seed(opts.seed, k))?;
        let result = bootstrap_mi_test(&retained, opts)?;
        points.push(MarkoffPoint {
            rate,
            retained: retained.len(),
            result,
        });
    }
    let critical_rate = points.iter().find(|p| !p.result.reject_null).map(|p| p.rate);
    Ok(MarkoffProfile {
        rates: rates.to_vec(),
        points,
        critical_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceKind;

    fn seq(raw: &[u32]) -> ActivitySequence {
        ActivitySequence::from_labels(raw.iter().copied(), "u", SequenceKind::Individual).unwrap()
    }

    #[test]
    fn rate_zero_is_identity() {
        let s = seq(&[3, 1, 4, 1, 5, 9, 2, 6]);
        assert_eq!(mark_off(&s, 0.0, 123).unwrap(), s);
    }

    #[test]
    fn retained_size_and_order() {
        let raw: Vec<u32> = (0..10).collect();
        let s = seq(&raw);
        let m = mark_off(&s, 0.3, 8).unwrap();
        assert_eq!(m.len(), 7);
        // all ten states are distinct, so compaction keeps relative order
        assert!(m.states().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn too_few_remaining() {
        let err = mark_off(&seq(&[0, 1, 2]), 0.9, 1).unwrap_err();
        assert_eq!(err, Error::TooFewRemaining { retained: 0 });
    }

    #[test]
    fn invalid_rates() {
        assert_eq!(retained_len(10, 1.0).unwrap_err(), Error::InvalidRate(1.0));
        assert!(retained_len(10, -0.1).is_err());
        assert!(retained_len(10, f64::NAN).is_err());
        let s = seq(&[0, 1, 0, 1, 0, 1]);
        let opts = BootstrapOptions::new(1).replicates(40);
        assert!(markoff_sweep(&s, &[0.2, 0.1], &opts).is_err());
        assert!(markoff_sweep(&s, &[], &opts).is_err());
    }

    #[test]
    fn default_rate_grid() {
        let r = default_rates();
        assert_eq!(r.len(), 10);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[9], 0.9);
    }

    #[test]
    fn constant_sequence_never_rejects() {
        let s = seq(&[2; 100]);
        let p = markoff_sweep(&s, &default_rates(), &BootstrapOptions::new(4).replicates(50)).unwrap();
        assert!(p.points.iter().all(|pt| !pt.result.reject_null));
        assert_eq!(p.critical_rate, Some(0.0));
        for (pt, rate) in p.points.iter().zip(default_rates()) {
            assert_eq!(pt.retained, retained_len(100, rate).unwrap());
        }
    }

    #[test]
    fn rate_zero_matches_plain_bootstrap() {
        let raw: Vec<u32> = (0..400).map(|k| ((k / 3) % 4) as u32).collect();
        let s = seq(&raw);
        let opts = BootstrapOptions::new(77).replicates(100);
        let p = markoff_sweep(&s, &[0.0, 0.5], &opts).unwrap();
        assert_eq!(p.points[0].result, bootstrap_mi_test(&s, &opts).unwrap());
    }
}
