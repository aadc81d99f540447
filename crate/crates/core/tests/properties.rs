use proptest::prelude::*;

use seqpredict::robustness::{retained_len, retained_positions};
use seqpredict::significance::replicate_reports;
use seqpredict::*;

fn seq_from(raw: &[u32]) -> ActivitySequence {
    ActivitySequence::from_labels(raw.iter().copied(), "p", SequenceKind::Individual).unwrap()
}

fn raw_states() -> impl Strategy<Value = Vec<u32>> {
    (1u32..12).prop_flat_map(|m| prop::collection::vec(0..m, 2..300))
}

fn sorted_counts(states: &[u32]) -> Vec<usize> {
    let m = states.iter().max().map_or(0, |&s| s as usize + 1);
    let mut c = vec![0usize; m];
    for &s in states {
        c[s as usize] += 1;
    }
    c.sort_unstable();
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn entropies_bounded_by_max_entropy(raw in raw_states()) {
        let r = entropy_report(&seq_from(&raw)).unwrap();
        prop_assert!(r.h1 >= 0.0 && r.h1 <= r.h0 + 1e-12);
        prop_assert!(r.h2 >= -1e-12 && r.h2 <= r.h0 + 1e-12);
        prop_assert!(r.h1_aligned <= r.h0 + 1e-12);
        prop_assert!(r.mi_aligned >= -1e-12);
        prop_assert!(r.mi <= r.h1 + 1e-12);
    }

    #[test]
    fn matches_brute_force(raw in raw_states()) {
        let s = seq_from(&raw);
        let fast = entropy_report(&s).unwrap();
        let slow = brute_force_report(&s).unwrap();
        prop_assert!((fast.h1 - slow.h1).abs() < 1e-12);
        prop_assert!((fast.h2 - slow.h2).abs() < 1e-12);
        prop_assert!((fast.mi - slow.mi).abs() < 1e-12);
        prop_assert!((fast.mi_aligned - slow.mi_aligned).abs() < 1e-12);
    }

    #[test]
    fn relabeling_does_not_change_entropies(raw in raw_states(), offset in 1u32..1000, stride in 1u32..50) {
        let a = entropy_report(&seq_from(&raw)).unwrap();
        let mapped: Vec<u32> = raw.iter().map(|&s| offset + stride * (11 - s)).collect();
        let b = entropy_report(&seq_from(&mapped)).unwrap();
        prop_assert!((a.h1 - b.h1).abs() < 1e-12);
        prop_assert!((a.h2 - b.h2).abs() < 1e-12);
        prop_assert_eq!(a.alphabet_size, b.alphabet_size);
    }

    #[test]
    fn reversal_keeps_h1(raw in raw_states()) {
        let mut rev = raw.clone();
        rev.reverse();
        let a = entropy_report(&seq_from(&raw)).unwrap();
        let b = entropy_report(&seq_from(&rev)).unwrap();
        prop_assert!((a.h1 - b.h1).abs() < 1e-12);
    }

    #[test]
    fn bias_terms_are_signed_and_halve_with_doubled_n(m in 1usize..50, n in 1usize..100_000) {
        let b = bias_h1(m, n).unwrap();
        prop_assert!(b <= 0.0);
        let b2 = bias_h1(m, 2 * n).unwrap();
        prop_assert!((b2 * 2.0 - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn bias_mi_is_difference_of_h1_and_h2_terms(
        m_bar_j in prop::collection::vec(1usize..10, 1..10),
        n in 2usize..10_000,
    ) {
        let m_bar = *m_bar_j.iter().max().unwrap();
        let mi = bias_mi(m_bar, &m_bar_j, n).unwrap();
        let diff = bias_h1(m_bar, n).unwrap() - bias_h2(&m_bar_j, n).unwrap();
        prop_assert!((mi - diff).abs() < 1e-12);
    }

    #[test]
    fn correction_raises_h1_and_h2(raw in raw_states()) {
        let r = corrected_report(&seq_from(&raw), SampleSizeConvention::Split).unwrap();
        let c = r.corrected.unwrap();
        prop_assert!(c.h1 >= r.h1);
        prop_assert!(c.h2 >= r.h2);
    }

    #[test]
    fn shuffle_is_a_permutation(raw in raw_states(), seed: u64) {
        let s = seq_from(&raw);
        let t = shuffle_sequence(&s, seed).unwrap();
        prop_assert_eq!(sorted_counts(s.states()), sorted_counts(t.states()));
        prop_assert_eq!(s.alphabet_size(), t.alphabet_size());
        prop_assert_eq!(&t, &shuffle_sequence(&s, seed).unwrap());
    }

    #[test]
    fn mark_off_is_an_ordered_subsequence(raw in raw_states(), rate in 0.0f64..0.95, seed: u64) {
        let s = seq_from(&raw);
        let keep = retained_len(s.len(), rate).unwrap();
        prop_assume!(keep >= 2);
        let pos = retained_positions(s.len(), rate, seed).unwrap();
        prop_assert_eq!(pos.len(), keep);
        prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let m = mark_off(&s, rate, seed).unwrap();
        let direct = seq_from(&pos.iter().map(|&p| s.states()[p]).collect::<Vec<_>>());
        // relabeling may differ, but the entropies may not
        let (a, b) = (entropy_report(&m).unwrap(), entropy_report(&direct).unwrap());
        prop_assert_eq!(m.len(), keep);
        prop_assert!((a.h1 - b.h1).abs() < 1e-12 && (a.h2 - b.h2).abs() < 1e-12);
    }

    #[test]
    fn mark_off_rate_zero_is_identity(raw in raw_states(), seed: u64) {
        let s = seq_from(&raw);
        prop_assert_eq!(mark_off(&s, 0.0, seed).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replicates_keep_h1_and_bootstrap_is_reproducible(raw in raw_states(), seed: u64) {
        let s = seq_from(&raw);
        let opts = BootstrapOptions::new(seed).replicates(40);
        let h1 = entropy_report(&s).unwrap().h1;
        for r in replicate_reports(&s, &opts.corrected(false)).unwrap() {
            prop_assert_eq!(r.h1.to_bits(), h1.to_bits());
        }
        let a = bootstrap_mi_test(&s, &opts).unwrap();
        let b = bootstrap_mi_test(&s, &opts).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.p025 <= a.p975);
        prop_assert_eq!(a.reject_null, a.mi_true > a.p975);
        prop_assert!((a.gap - (a.mi_true - a.p975)).abs() < 1e-15);
    }
}

fn event_log() -> impl Strategy<Value = Vec<EventRecord>> {
    let row = (0usize..4, 0i64..50, 0u8..5, any::<bool>());
    prop::collection::vec(row, 0..120).prop_map(|rows| {
        rows.into_iter()
            .map(|(u, t, s, group)| {
                let user = format!("user{u}");
                let participants = group.then(|| vec![user.clone(), "friend".to_string()]);
                EventRecord::new(user, Timestamp::from_epoch(1_000 + t), format!("s{s}"), participants).unwrap()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jsonl_roundtrip_is_identity(events in event_log()) {
        let mut buf = Vec::new();
        seqpredict::ingestion::write_jsonl(&mut buf, &events).unwrap();
        let parsed = parse_event_log(&buf[..], LogFormat::Jsonl).unwrap();
        prop_assert!(parsed.diagnostics.is_empty());
        prop_assert_eq!(parsed.records, events);
    }

    #[test]
    fn presorted_log_builds_same_sequences_and_roundtrips(events in event_log()) {
        let config = CohortConfig::with_min_events(2);
        let a = build_sequences(&events, &config);
        // presorting with a stable sort keeps ties in input order
        let mut shuffled = events.clone();
        shuffled.sort_by_key(|e| e.timestamp);
        prop_assert_eq!(&a, &build_sequences(&shuffled, &config));
        let mut file = Vec::new();
        write_sequence_file(&mut file, a.values()).unwrap();
        let back = read_sequence_file(&file[..], SequenceKind::Individual).unwrap();
        prop_assert_eq!(back.len(), a.len());
        for (b, s) in back.iter().zip(a.values()) {
            prop_assert_eq!(b.states(), s.states());
            prop_assert_eq!(b.source_user(), s.source_user());
        }
    }

    #[test]
    fn partition_conserves_events(events in event_log()) {
        let pairs = partition_group_individual(&events, &CohortConfig::with_min_events(2));
        let total: usize = pairs.values().map(|p| p.individual_events + p.group_events).sum();
        prop_assert_eq!(total, events.len());
        for (user, p) in &pairs {
            let groups = events.iter().filter(|e| &e.user == user && e.is_group()).count();
            prop_assert_eq!(p.group_events, groups);
        }
    }
}
