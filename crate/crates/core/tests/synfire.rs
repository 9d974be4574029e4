mod common;

use common::*;
use epimine::parallel::mine_parallel;
use epimine::simulator::{build_network, embed_pattern, preset_patterns, setup_rng, simulate, ConnectionScheme, SimParams};
use epimine::synfire::{chain_groups, mine_synfire, substitute_occurrences};
use epimine::{EventSequence, MiningConfig};

fn pattern_data(preset: &str, duration: f64, seed: u64) -> EventSequence {
    let p = SimParams {
        duration,
        seed,
        ..SimParams::default()
    };
    let mut net = build_network(&p, ConnectionScheme::BernoulliPairs, &mut setup_rng(seed)).unwrap();
    for s in preset_patterns(preset).unwrap() {
        net = embed_pattern(&net, &s, &p).unwrap();
    }
    simulate(&net, &p).unwrap()
}

fn pcfg() -> MiningConfig {
    MiningConfig {
        expiry: Some(0.001),
        record_occurrences: true,
        ..MiningConfig::default()
    }
}

#[test]
fn substitution_conserves_events() {
    let seq = pattern_data("synfire", 8.0, 2);
    let mined = mine_parallel(&seq, &pcfg()).unwrap();
    let chosen = epimine::parallel::maximal_episodes(&mined);
    assert!(!chosen.is_empty());
    let (sub, map) = substitute_occurrences(&seq, &chosen).unwrap();

    let removed: usize = chosen
        .iter()
        .map(|g| g.count as usize * (g.episode.len() - 1))
        .sum();
    assert_eq!(sub.len(), seq.len() - removed);
    assert_eq!(map.replacements.len() as u64, chosen.iter().map(|g| g.count).sum::<u64>());
    assert!(sub.events().windows(2).all(|w| w[0].time <= w[1].time));

    // expand composites back and compare the multisets of (label, time)
    let mut consumed = vec![false; seq.len()];
    for r in &map.replacements {
        let b = &map.bindings[r.binding];
        assert_eq!(sub.label_of(r.output_index), b.label);
        let times: Vec<f64> = r.source_indices.iter().map(|&i| seq.events()[i].time).collect();
        let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(r.time >= lo - 1e-9 && r.time <= hi + 1e-9);
        for &i in &r.source_indices {
            assert!(!consumed[i]);
            consumed[i] = true;
        }
    }
    let mut left: Vec<(String, u64)> = (0..seq.len())
        .filter(|&i| !consumed[i])
        .map(|i| (seq.label_of(i).to_string(), (seq.events()[i].time * 1e9).round() as u64))
        .collect();
    let composites: std::collections::HashSet<usize> = map.replacements.iter().map(|r| r.output_index).collect();
    let mut kept: Vec<(String, u64)> = (0..sub.len())
        .filter(|i| !composites.contains(i))
        .map(|i| (sub.label_of(i).to_string(), (sub.events()[i].time * 1e9).round() as u64))
        .collect();
    left.sort();
    kept.sort();
    assert_eq!(left, kept);
}

#[test]
fn hand_built_chain() {
    // A fires, then B and C together 5 ms later, then D 5 ms after that
    let mut evs = Vec::new();
    for k in 0..20u32 {
        let t = k * 100;
        evs.extend([(0, t), (1, t + 5), (2, t + 5), (3, t + 10)]);
    }
    evs.push((4, 3000));
    let seq = sequence(5, &evs);
    let scfg = MiningConfig {
        candidate_intervals: vec![iv(0.004, 0.006)],
        threshold_fraction: 0.1,
        ..MiningConfig::default()
    };
    let r = mine_synfire(&seq, &MiningConfig { threshold_fraction: 0.1, ..pcfg() }, &scfg).unwrap();
    let longest = r.longest_chains();
    assert_eq!(longest.len(), 1);
    assert_eq!(longest[0].count, 20);
    let shown = r.display(&longest[0]);
    assert_eq!(chain_groups(&shown), chain_groups("A [C B] D"), "{shown}");
}

#[test]
fn synfire_needs_recorded_occurrences() {
    let seq = sequence(2, &[(0, 0), (1, 1)]);
    let no_rec = MiningConfig {
        expiry: Some(0.001),
        ..MiningConfig::default()
    };
    let scfg = MiningConfig {
        candidate_intervals: vec![iv(0.004, 0.006)],
        ..MiningConfig::default()
    };
    assert!(mine_synfire(&seq, &no_rec, &scfg).is_err());
}
