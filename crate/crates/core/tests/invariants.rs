mod common;

use common::*;
use epimine::model::pairwise_non_overlapped;
use epimine::parallel::{count_parallel_all, mine_parallel};
use epimine::serial::{count_serial_all, count_serial_with, mine_serial, SerialCountOptions};
use epimine::simulator::{build_network, embed_pattern, preset_patterns, setup_rng, simulate, ConnectionScheme, SimParams};
use epimine::{Episode, EpisodeKind, EventSequence, MiningConfig};
use proptest::prelude::*;

fn cfg_parallel(tx: f64) -> MiningConfig {
    MiningConfig {
        threshold_fraction: 0.0,
        min_count: Some(1),
        expiry: Some(tx),
        max_size: 4,
        record_occurrences: true,
        ..MiningConfig::default()
    }
}

fn cfg_serial() -> MiningConfig {
    MiningConfig {
        threshold_fraction: 0.0,
        min_count: Some(1),
        candidate_intervals: vec![iv(0.0, 0.003), iv(0.003, 0.008)],
        max_size: 4,
        record_occurrences: true,
        ..MiningConfig::default()
    }
}

fn occurrences_valid(seq: &EventSequence, ep: &Episode, occ: &[Vec<usize>], tx: Option<f64>) -> bool {
    occ.iter().all(|idx| {
        let types_ok = match ep.kind() {
            EpisodeKind::Serial => idx.iter().zip(ep.nodes()).all(|(&i, &t)| seq.events()[i].etype == t),
            EpisodeKind::Parallel => {
                let mut ts: Vec<_> = idx.iter().map(|&i| seq.events()[i].etype).collect();
                ts.sort();
                ts == ep.nodes()
            }
        };
        let times: Vec<f64> = idx.iter().map(|&i| seq.events()[i].time).collect();
        let order_ok = ep.kind() == EpisodeKind::Parallel || idx.windows(2).all(|w| w[0] < w[1]);
        let gaps_ok = ep.intervals().iter().zip(times.windows(2)).all(|(iv, w)| iv.contains(w[1] - w[0]));
        let span_ok = tx.is_none_or(|tx| {
            let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo <= tx + 1e-9
        });
        types_ok && order_ok && gaps_ok && span_ok
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Counts never exceed those of any subepisode, and recorded occurrences
    /// are valid and non-overlapped.
    #[test]
    fn parallel_anti_monotone(seq in small_sequence(40)) {
        let mined = mine_parallel(&seq, &cfg_parallel(0.003)).unwrap();
        for r in mined.iter().filter(|r| r.episode.len() >= 2) {
            let nodes = r.episode.nodes();
            let subs: Vec<Episode> = (0..nodes.len())
                .map(|skip| Episode::parallel(nodes.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &t)| t).collect()).unwrap())
                .collect();
            for (c, _) in count_parallel_all(&subs, &seq, 0.003, false).unwrap() {
                prop_assert!(r.count <= c);
            }
            let occ = r.occurrences.as_ref().unwrap();
            prop_assert_eq!(occ.len() as u64, r.count);
            prop_assert!(pairwise_non_overlapped(occ));
            let idx: Vec<Vec<usize>> = occ.iter().map(|o| o.event_indices.clone()).collect();
            prop_assert!(occurrences_valid(&seq, &r.episode, &idx, Some(0.003)));
        }
    }

    /// Prefix and suffix subepisodes (with their intervals) are at least as
    /// frequent.
    #[test]
    fn serial_prefix_suffix_monotone(seq in small_sequence(40)) {
        let mined = mine_serial(&seq, &cfg_serial()).unwrap();
        for r in mined.iter().filter(|r| r.episode.len() >= 2) {
            let n = r.episode.len();
            let nodes = r.episode.nodes();
            let ivs = r.episode.intervals();
            let prefix = Episode::serial(nodes[..n - 1].to_vec(), ivs[..n - 2].to_vec()).unwrap();
            let suffix = Episode::serial(nodes[1..].to_vec(), ivs[1..].to_vec()).unwrap();
            for (c, _) in count_serial_all(&[prefix, suffix], &seq, false).unwrap() {
                prop_assert!(r.count <= c);
            }
            let occ = r.occurrences.as_ref().unwrap();
            prop_assert_eq!(occ.len() as u64, r.count);
            prop_assert!(pairwise_non_overlapped(occ));
            let idx: Vec<Vec<usize>> = occ.iter().map(|o| o.event_indices.clone()).collect();
            prop_assert!(occurrences_valid(&seq, &r.episode, &idx, None));
        }
    }

    /// Dropping expired tlist entries changes memory use only.
    #[test]
    fn pruning_is_safe(seq in small_sequence(40)) {
        let k = seq.alphabet().len();
        let mut cands = Vec::new();
        for nodes in all_serial(k, 3) {
            for ivs in interval_assignments(&[iv(0.0, 0.002), iv(0.002, 0.006)], 2) {
                cands.push(Episode::serial(nodes.clone(), ivs).unwrap());
            }
        }
        let on = count_serial_with(&cands, &seq, SerialCountOptions { record_occurrences: true, prune: true }).unwrap();
        let off = count_serial_with(&cands, &seq, SerialCountOptions { record_occurrences: true, prune: false }).unwrap();
        prop_assert_eq!(on, off);
    }

    /// Counting a batch gives the same numbers as counting one at a time.
    #[test]
    fn batch_independent(seq in small_sequence(30)) {
        let k = seq.alphabet().len();
        let cands: Vec<Episode> = (1..=3).flat_map(|s| all_parallel(k, s)).collect();
        let batch = count_parallel_all(&cands, &seq, 0.004, false).unwrap();
        for (ep, b) in cands.iter().zip(&batch) {
            let single = count_parallel_all(std::slice::from_ref(ep), &seq, 0.004, false).unwrap();
            prop_assert_eq!(&single[0], b);
        }
    }
}

#[test]
fn mining_is_deterministic() {
    let p = SimParams {
        duration: 5.0,
        seed: 21,
        ..SimParams::default()
    };
    let mut net = build_network(&p, ConnectionScheme::BernoulliPairs, &mut setup_rng(p.seed)).unwrap();
    for s in preset_patterns("example1").unwrap() {
        net = embed_pattern(&net, &s, &p).unwrap();
    }
    let seq = simulate(&net, &p).unwrap();
    let cfg = MiningConfig {
        candidate_intervals: vec![iv(0.004, 0.006)],
        record_occurrences: true,
        ..MiningConfig::default()
    };
    let a = mine_serial(&seq, &cfg).unwrap();
    let b = mine_serial(&seq, &cfg).unwrap();
    assert_eq!(a.levels, b.levels);
    let pcfg = MiningConfig {
        expiry: Some(0.002),
        ..MiningConfig::default()
    };
    assert_eq!(mine_parallel(&seq, &pcfg).unwrap().levels, mine_parallel(&seq, &pcfg).unwrap().levels);
}

#[test]
fn threshold_counts() {
    assert_eq!(epimine::threshold_count(25_000, 0.01, None), 250);
    assert_eq!(epimine::threshold_count(25_001, 0.01, None), 251);
    assert_eq!(epimine::threshold_count(100, 0.5, Some(7)), 7);
}
