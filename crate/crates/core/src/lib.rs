//! Predictability of discrete event sequences.
//!
//! A user's activity log (conversation partners, check-in places, ...) is
//! reduced to a chronological sequence of opaque states. From it we estimate
//! the marginal entropy, the conditional entropy of the next state given the
//! current one, and their difference, the mutual information, which measures
//! how much the current state says about the next. On top of the plug-in
//! estimates the crate provides
//!
//! * leading-order finite-sample bias corrections ([`bias`]),
//! * a shuffle (permutation) test of the mutual information and two-sample
//!   t-tests over gap statistics ([`significance`]),
//! * random-deletion robustness sweeps ([`robustness`]),
//! * event-log ingestion ([`ingestion`]) and synthetic Markov oracles
//!   ([`oracle`]) for validation.

pub mod bias;
pub mod cli;
pub mod error;
pub mod histogram;
pub mod ingestion;
pub mod oracle;
pub mod robustness;
pub mod seeds;
pub mod sequence;
pub mod significance;

pub use bias::{apply_correction, bias_h1, bias_h2, bias_mi, corrected_report, BiasTerms, SampleSizeConvention};
pub use error::{Error, Result};
pub use histogram::Histogram;
pub use ingestion::{
    build_sequences, parse_event_log, partition_group_individual, read_sequence_file, write_sequence_file,
    CohortConfig, DedupPolicy, EventRecord, LogFormat, ParsedLog, StreamPair, Timestamp,
};
pub use oracle::{
    analytic_entropies, brute_force_report, sample_markov, simulate_events, stationary_distribution, CohortSpec,
    MarkovSpec,
};
pub use robustness::{mark_off, markoff_sweep, MarkoffProfile};
pub use sequence::{
    conditional_entropy, entropy_report, fit_models, max_entropy, mutual_information, plugin_entropy,
    ActivitySequence, BigramModel, EntropyReport, EstimatorMode, SequenceKind, UnigramModel,
};
pub use significance::{
    bootstrap_mi_test, compare_groups, gap_statistic, pooled_t_test, shuffle_sequence, BootstrapOptions,
    BootstrapResult, TTestKind, TTestResult,
};
