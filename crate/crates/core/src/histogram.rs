use serde::{Deserialize, Serialize};

/// Equal-width histogram over `[lo, hi]`; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Counts normalized so the histogram integrates to one.
    pub density: Vec<f64>,
}

impl Histogram {
    /// Bins `values` into `bins` equal-width bins. Without an explicit range
    /// the data's min and max are used. Values outside the range and
    /// non-finite values are ignored.
    pub fn new(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Self {
        let bins = bins.max(1);
        let (lo, mut hi) = range.unwrap_or_else(|| finite_range(values));
        if hi <= lo {
            hi = lo + 1.0;
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
        let mut counts = vec![0usize; bins];
        for &v in values {
            if !v.is_finite() || v < lo || v > hi {
                continue;
            }
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total: usize = counts.iter().sum();
        let density = counts
            .iter()
            .map(|&c| if total == 0 { 0.0 } else { c as f64 / (total as f64 * width) })
            .collect();
        Histogram { edges, counts, density }
    }
}

pub(crate) fn finite_range(values: &[f64]) -> (f64, f64) {
    let mut it = values.iter().copied().filter(|v| v.is_finite());
    match it.next() {
        None => (0.0, 1.0),
        Some(first) => it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))),
    }
}
