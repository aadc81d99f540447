//! Synthetic sequences with known ground truth, and a brute-force entropy
//! oracle that shares no counting code with [`crate::sequence`].

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingestion::{EventRecord, Timestamp};
use crate::seeds::{derive_seed, DOMAIN_SIMULATE};
use crate::sequence::{ActivitySequence, EntropyReport, SequenceKind};

const STOCHASTIC_TOL: f64 = 1e-12;

/// First-order Markov chain plus sampling parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovSpec {
    #[serde(rename = "M")]
    pub m: usize,
    /// Row-stochastic: `p[j][i]` is the probability of moving from `j` to `i`.
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

fn check_distribution(what: &str, row: &[f64]) -> Result<()> {
    if row.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::InvalidSpec(format!("{what} has a negative or non-finite entry")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidSpec(format!("{what} sums to {sum}, not 1")));
    }
    Ok(())
}

/// Checks that `p` is a square row-stochastic matrix.
pub fn validate_transition_matrix(p: &[Vec<f64>]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidSpec("empty transition matrix".into()));
    }
    for (j, row) in p.iter().enumerate() {
        if row.len() != p.len() {
            return Err(Error::InvalidSpec(format!("row {j} has {} entries, expected {}", row.len(), p.len())));
        }
        check_distribution(&format!("row {j}"), row)?;
    }
    Ok(())
}

impl MarkovSpec {
    /// Chain that stays put with probability `p_stay` and otherwise jumps
    /// uniformly to one of the other states; starts uniformly.
    pub fn sticky(m: usize, p_stay: f64, n: usize, seed: u64) -> Self {
        let p = (0..m)
            .map(|j| {
                (0..m)
                    .map(|i| match (i == j, m) {
                        (true, _) => p_stay,
                        (false, 1) => 0.0,
                        (false, _) => (1.0 - p_stay) / (m - 1) as f64,
                    })
                    .collect()
            })
            .collect();
        MarkovSpec {
            m,
            p,
            initial: vec![1.0 / m as f64; m],
            n,
            seed,
        }
    }

    /// I.i.d. uniform draws over `m` states.
    pub fn iid_uniform(m: usize, n: usize, seed: u64) -> Self {
        let row = vec![1.0 / m as f64; m];
        MarkovSpec {
            m,
            p: vec![row.clone(); m],
            initial: row,
            n,
            seed,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        MarkovSpec { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidSpec("M must be positive".into()));
        }
        if self.p.len() != self.m || self.initial.len() != self.m {
            return Err(Error::InvalidSpec(format!(
                "M = {} but P has {} rows and initial has {} entries",
                self.m,
                self.p.len(),
                self.initial.len()
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be positive".into()));
        }
        validate_transition_matrix(&self.p)?;
        check_distribution("initial", &self.initial)
    }
}

fn draw(rng: &mut ChaCha8Rng, dist: &[f64]) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u32;
        }
    }
    // rounding left u above the last cumulative sum
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
}

/// Raw state ids `0..M` of a sampled chain. States never visited leave gaps.
pub fn sample_markov_states(spec: &MarkovSpec) -> Result<Vec<u32>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut states = Vec::with_capacity(spec.n);
    let mut cur = draw(&mut rng, &spec.initial);
    states.push(cur);
    for _ in 1..spec.n {
        cur = draw(&mut rng, &spec.p[cur as usize]);
        states.push(cur);
    }
    Ok(states)
}

/// Samples a chain as an activity sequence. When every state is visited the
/// ids equal the chain's states.
pub fn sample_markov(spec: &MarkovSpec) -> Result<ActivitySequence> {
    let states = sample_markov_states(spec)?;
    ActivitySequence::from_ids(states, format!("markov-{}", spec.seed), SequenceKind::Individual)
}

pub const MAX_POWER_ITERATIONS: usize = 1_000_000;

/// Stationary distribution by power iteration on the lazy chain `(I + P) / 2`,
/// which has the same fixed point and also converges for periodic chains.
/// Stops once `|pi P - pi|_1 < 1e-12`.
pub fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    validate_transition_matrix(p)?;
    let m = p.len();
    let step = |pi: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (j, row) in p.iter().enumerate() {
            for (i, &pji) in row.iter().enumerate() {
                out[i] += pi[j] * pji;
            }
        }
        out
    };
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..MAX_POWER_ITERATIONS {
        let next = step(&pi);
        let residual: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        if residual < 1e-12 {
            let total: f64 = next.iter().sum();
            return Ok(next.into_iter().map(|x| x / total).collect());
        }
        pi = pi.iter().zip(&next).map(|(a, b)| 0.5 * (a + b)).collect();
    }
    Err(Error::NoConvergence(MAX_POWER_ITERATIONS))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticEntropies {
    pub h1_inf: f64,
    pub h2_inf: f64,
    pub mi_inf: f64,
}

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Asymptotic marginal entropy, entropy rate and MI of a stationary chain.
pub fn analytic_entropies(p: &[Vec<f64>], pi: &[f64]) -> AnalyticEntropies {
    let h1_inf = -pi.iter().map(|&x| xlog2x(x)).sum::<f64>();
    let h2_inf = -p
        .iter()
        .zip(pi)
        .map(|(row, &pj)| pj * row.iter().map(|&x| xlog2x(x)).sum::<f64>())
        .sum::<f64>();
    AnalyticEntropies {
        h1_inf,
        h2_inf,
        mi_inf: h1_inf - h2_inf,
    }
}

pub const ORACLE_MAX_LEN: usize = 10_000;

/// `log2 N - (1/N) sum c log2 c` over a dictionary of counts.
fn dict_entropy<K>(counts: &HashMap<K, usize>) -> f64 {
    let total: usize = counts.values().sum();
    let n = total as f64;
    let weighted: f64 = counts.values().map(|&c| c as f64 * (c as f64).log2()).sum();
    n.log2() - weighted / n
}

/// Entropy report by direct dictionary counting. The conditional entropy is
/// taken as `H(pair) - H(predecessor)` rather than by averaging per-context
/// entropies, so the arithmetic differs from the main estimator too.
pub fn brute_force_report(seq: &ActivitySequence) -> Result<EntropyReport> {
    let s = seq.states();
    if s.len() > ORACLE_MAX_LEN {
        return Err(Error::OracleScaleExceeded { limit: ORACLE_MAX_LEN, got: s.len() });
    }
    if s.len() < 2 {
        return Err(Error::SequenceTooShort { needed: 2, got: s.len() });
    }
    let mut singles: HashMap<u32, usize> = HashMap::new();
    let mut predecessors: HashMap<u32, usize> = HashMap::new();
    let mut successors: HashMap<u32, usize> = HashMap::new();
    let mut pairs: HashMap<(u32, u32), usize> = HashMap::new();
    for (k, &x) in s.iter().enumerate() {
        *singles.entry(x).or_default() += 1;
        if k + 1 < s.len() {
            let y = s[k + 1];
            *predecessors.entry(x).or_default() += 1;
            *successors.entry(y).or_default() += 1;
            *pairs.entry((x, y)).or_default() += 1;
        }
    }
    let h0 = (singles.len() as f64).ln() / std::f64::consts::LN_2;
    let h1 = dict_entropy(&singles);
    let h2 = dict_entropy(&pairs) - dict_entropy(&predecessors);
    let h1_aligned = dict_entropy(&successors);
    Ok(EntropyReport {
        h0,
        h1,
        h2,
        mi: h1 - h2,
        h1_aligned,
        mi_aligned: h1_aligned - h2,
        n: s.len(),
        n_transitions: s.len() - 1,
        alphabet_size: singles.len(),
        corrected: None,
    })
}

/// A batch of synthetic users for end-to-end runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSpec {
    pub users: usize,
    #[serde(default = "default_prefix")]
    pub user_prefix: String,
    /// Chain for solo activity. Its seed is the cohort's master seed.
    pub individual: MarkovSpec,
    /// Chain for group activity; when present, solo events carry the user as
    /// their only participant and group events add a companion.
    #[serde(default)]
    pub group: Option<MarkovSpec>,
    #[serde(default = "default_start")]
    pub start_ts: i64,
    #[serde(default = "default_interval")]
    pub interval_secs: i64,
}

fn default_prefix() -> String {
    "u".into()
}

fn default_start() -> i64 {
    1_262_304_000
}

fn default_interval() -> i64 {
    3600
}

/// Either a full cohort or a single chain (one user).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimulationConfig {
    Cohort(CohortSpec),
    Single(MarkovSpec),
}

impl SimulationConfig {
    pub fn into_cohort(self) -> CohortSpec {
        match self {
            SimulationConfig::Cohort(c) => c,
            SimulationConfig::Single(spec) => CohortSpec {
                users: 1,
                user_prefix: default_prefix(),
                individual: spec,
                group: None,
                start_ts: default_start(),
                interval_secs: default_interval(),
            },
        }
    }
}

impl CohortSpec {
    pub fn user_id(&self, index: usize) -> String {
        let width = self.users.saturating_sub(1).to_string().len();
        format!("{}{:0width$}", self.user_prefix, index)
    }
}

/// Generates the cohort's event log. User `u` samples its solo chain with
/// seed `derive(seed, 3u)`, its group chain with `derive(seed, 3u + 1)`, and
/// interleaves the two streams uniformly at random with `derive(seed, 3u + 2)`.
pub fn simulate_events(cohort: &CohortSpec) -> Result<Vec<EventRecord>> {
    cohort.individual.validate()?;
    if let Some(g) = &cohort.group {
        g.validate()?;
    }
    let master = cohort.individual.seed;
    let mut events = Vec::new();
    for u in 0..cohort.users {
        let user = cohort.user_id(u);
        let seed = |k: u64| derive_seed(master, DOMAIN_SIMULATE, 3 * u as u64 + k);
        let solo = sample_markov_states(&cohort.individual.with_seed(seed(0)))?;
        let group = match &cohort.group {
            Some(g) => sample_markov_states(&g.with_seed(seed(1)))?,
            None => Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed(2));
        let (mut si, mut gi) = (0usize, 0usize);
        for k in 0..solo.len() + group.len() {
            let remaining_solo = solo.len() - si;
            let remaining_group = group.len() - gi;
            let pick_solo = rng.random_range(0..remaining_solo + remaining_group) < remaining_solo;
            let ts = Timestamp::from_epoch(cohort.start_ts + cohort.interval_secs * k as i64);
            let rec = if pick_solo {
                si += 1;
                let participants = cohort.group.as_ref().map(|_| vec![user.clone()]);
                EventRecord::new(&user, ts, format!("p{}", solo[si - 1]), participants)
            } else {
                gi += 1;
                let participants = vec![user.clone(), format!("{user}-companion")];
                EventRecord::new(&user, ts, format!("g{}", group[gi - 1]), Some(participants))
            };
            events.push(rec.map_err(Error::InvalidSpec)?);
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::entropy_report;

    #[test]
    fn identity_chain_is_constant() {
        let spec = MarkovSpec {
            m: 3,
            p: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            initial: vec![1.0, 0.0, 0.0],
            n: 20,
            seed: 1,
        };
        assert_eq!(sample_markov_states(&spec).unwrap(), vec![0; 20]);
        assert_eq!(sample_markov(&spec).unwrap().alphabet_size(), 1);
    }

    #[test]
    fn cycle_alternates() {
        let spec = MarkovSpec {
            m: 2,
            p: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            initial: vec![1.0, 0.0],
            n: 9,
            seed: 4,
        };
        let s = sample_markov(&spec).unwrap();
        assert_eq!(s.states(), &[0, 1, 0, 1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn empirical_transitions_match() {
        let spec = MarkovSpec::sticky(2, 0.9, 50_000, 2024);
        let s = sample_markov_states(&spec).unwrap();
        let mut c = [[0f64; 2]; 2];
        for w in s.windows(2) {
            c[w[0] as usize][w[1] as usize] += 1.0;
        }
        for (counts, probs) in c.iter().zip(&spec.p) {
            let row = counts[0] + counts[1];
            for (x, p) in counts.iter().zip(probs) {
                assert!((x / row - p).abs() < 0.01);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = MarkovSpec::sticky(4, 0.6, 500, 9);
        assert_eq!(sample_markov(&spec).unwrap(), sample_markov(&spec).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let mut spec = MarkovSpec::sticky(2, 0.9, 10, 0);
        spec.p[0][0] = 0.8;
        assert!(matches!(sample_markov(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = MarkovSpec::sticky(2, 0.9, 10, 0);
        spec.initial = vec![1.0];
        assert!(spec.validate().is_err());
        let mut spec = MarkovSpec::sticky(2, 0.9, 10, 0);
        spec.p[1] = vec![1.5, -0.5];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn stationary_examples() {
        let pi = stationary_distribution(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
        let pi = stationary_distribution(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-10);
        assert!((pi[1] - 1.0 / 3.0).abs() < 1e-10);
        let pi = stationary_distribution(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn stationary_periodic_chain() {
        // 3-cycle with an uneven start converges via the lazy chain
        let p = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
        let pi = stationary_distribution(&p).unwrap();
        for x in pi {
            assert!((x - 1.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn non_stochastic_matrix_is_rejected() {
        assert!(stationary_distribution(&[vec![0.5, 0.6], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn analytic_examples() {
        let p = vec![vec![0.9, 0.1], vec![0.1, 0.9]];
        let a = analytic_entropies(&p, &[0.5, 0.5]);
        let hb = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
        assert!((a.h1_inf - 1.0).abs() < 1e-12);
        assert!((a.h2_inf - hb).abs() < 1e-12);
        assert!((a.h2_inf - 0.468996).abs() < 1e-6);
        assert!((a.mi_inf - 0.531004).abs() < 1e-6);

        let pi = [0.2, 0.3, 0.5];
        let iid = vec![pi.to_vec(); 3];
        assert!(analytic_entropies(&iid, &pi).mi_inf.abs() < 1e-12);

        let perm = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
        let a = analytic_entropies(&perm, &[1.0 / 3.0; 3]);
        assert_eq!(a.h2_inf, 0.0);
        assert_eq!(a.mi_inf, a.h1_inf);
    }

    #[test]
    fn brute_force_examples() {
        let s = ActivitySequence::from_labels([1, 2, 1, 2], "u", SequenceKind::Mixed).unwrap();
        let r = brute_force_report(&s).unwrap();
        assert!((r.h1 - 1.0).abs() < 1e-12);
        assert!(r.h2.abs() < 1e-12);
        let s = ActivitySequence::from_labels([1, 1, 2], "u", SequenceKind::Mixed).unwrap();
        let r = brute_force_report(&s).unwrap();
        assert!((r.h2 - 1.0).abs() < 1e-12);
        let m = entropy_report(&s).unwrap();
        assert!((m.mi - r.mi).abs() < 1e-12);

        let big = ActivitySequence::new(vec![0; ORACLE_MAX_LEN + 1], "u", SequenceKind::Mixed).unwrap();
        assert!(matches!(brute_force_report(&big), Err(Error::OracleScaleExceeded { .. })));
    }

    #[test]
    fn cohort_simulation_layout() {
        let cohort = CohortSpec {
            users: 3,
            user_prefix: "u".into(),
            individual: MarkovSpec::sticky(3, 0.9, 40, 5),
            group: Some(MarkovSpec::iid_uniform(2, 15, 0)),
            start_ts: 0,
            interval_secs: 10,
        };
        let events = simulate_events(&cohort).unwrap();
        assert_eq!(events.len(), 3 * 55);
        for u in ["u0", "u1", "u2"] {
            let mine: Vec<_> = events.iter().filter(|e| e.user == u).collect();
            assert_eq!(mine.iter().filter(|e| e.is_group()).count(), 15);
            assert!(mine.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
        }
        assert_eq!(simulate_events(&cohort).unwrap(), events);
    }

    #[test]
    fn simulation_config_accepts_bare_chain() {
        let json = r#"{"M":2,"P":[[0.9,0.1],[0.1,0.9]],"initial":[0.5,0.5],"n":100,"seed":3}"#;
        let cfg: SimulationConfig = serde_json::from_str(json).unwrap();
        let cohort = cfg.into_cohort();
        assert_eq!(cohort.users, 1);
        assert_eq!(simulate_events(&cohort).unwrap().len(), 100);
    }
}
