//! Parallel episodes under an expiry-time constraint.
//!
//! Counting follows the waits-list automaton: each candidate keeps one entry
//! per event type holding the latest sighting of that type, so the automaton
//! always tracks the innermost occurrence. When every type has been seen,
//! entries older than the expiry window are demoted back to waiting; if all
//! survive, the occurrence is counted and the candidate resets.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{domain, Result};
use crate::levels::{sort_results, MinedLevels};
use crate::model::{
    threshold_count, Episode, EpisodeKind, EventSequence, EventType, FrequentEpisodeResult, MiningConfig,
    OccurrenceRecord, TIME_TOLERANCE,
};

#[derive(Clone, Copy, Debug)]
struct WaitEntry {
    waiting: bool,
    init: f64,
    index: usize,
}

#[derive(Clone, Debug)]
struct CandidateState {
    entries: Vec<WaitEntry>,
    counter: usize,
    freq: u64,
    occurrences: Vec<OccurrenceRecord>,
}

/// Raw counts (and optionally occurrences) for every candidate, in input order.
pub fn count_parallel_all(
    candidates: &[Episode],
    seq: &EventSequence,
    expiry: f64,
    record_occurrences: bool,
) -> Result<Vec<(u64, Option<Vec<OccurrenceRecord>>)>> {
    if !(expiry > 0.0 && expiry.is_finite()) {
        return domain(format!("expiry must be positive, got {expiry}"));
    }
    let mut waits: Vec<Vec<(usize, usize)>> = vec![Vec::new(); seq.alphabet().len()];
    let mut states = Vec::with_capacity(candidates.len());
    for (c, ep) in candidates.iter().enumerate() {
        if ep.kind() != EpisodeKind::Parallel {
            return domain("count_parallel needs parallel episodes");
        }
        let mut seen = HashSet::new();
        for (n, &t) in ep.nodes().iter().enumerate() {
            if !seen.insert(t) {
                return domain("parallel candidate has repeated event types");
            }
            if t.index() >= waits.len() {
                return domain(format!("event type id {} outside the sequence alphabet", t.0));
            }
            waits[t.index()].push((c, n));
        }
        states.push(CandidateState {
            entries: vec![
                WaitEntry {
                    waiting: true,
                    init: 0.0,
                    index: 0,
                };
                ep.len()
            ],
            counter: 0,
            freq: 0,
            occurrences: Vec::new(),
        });
    }

    for (i, ev) in seq.events().iter().enumerate() {
        let t = ev.time;
        for &(c, n) in &waits[ev.etype.index()] {
            let st = &mut states[c];
            let size = st.entries.len();
            let entry = &mut st.entries[n];
            if entry.waiting {
                entry.waiting = false;
                st.counter += 1;
            }
            entry.init = t;
            entry.index = i;

            if st.counter == size {
                for q in st.entries.iter_mut() {
                    if t - q.init > expiry + TIME_TOLERANCE {
                        st.counter -= 1;
                        q.waiting = true;
                    }
                }
            }
            if st.counter == size {
                st.freq += 1;
                st.counter = 0;
                if record_occurrences {
                    st.occurrences.push(OccurrenceRecord {
                        event_indices: st.entries.iter().map(|q| q.index).collect(),
                    });
                }
                for q in st.entries.iter_mut() {
                    q.waiting = true;
                }
            }
        }
    }

    Ok(states
        .into_iter()
        .map(|st| (st.freq, record_occurrences.then_some(st.occurrences)))
        .collect())
}

/// Counts `candidates` in one pass and keeps those reaching
/// `ceil(n * threshold_fraction)`.
pub fn count_parallel(
    candidates: &[Episode],
    seq: &EventSequence,
    expiry: f64,
    threshold_fraction: f64,
) -> Result<Vec<FrequentEpisodeResult>> {
    let min = threshold_count(seq.len(), threshold_fraction, None);
    filter_frequent(candidates, count_parallel_all(candidates, seq, expiry, false)?, min)
}

fn filter_frequent(
    candidates: &[Episode],
    counts: Vec<(u64, Option<Vec<OccurrenceRecord>>)>,
    min: u64,
) -> Result<Vec<FrequentEpisodeResult>> {
    Ok(candidates
        .iter()
        .zip(counts)
        .filter(|(_, (count, _))| *count >= min)
        .map(|(ep, (count, occurrences))| FrequentEpisodeResult {
            episode: ep.clone(),
            count,
            occurrences,
        })
        .collect())
}

/// Joins frequent k-node parallel episodes sharing their first k-1 nodes and
/// keeps a (k+1)-node candidate only if all of its k-node subsets are frequent.
pub fn generate_parallel_candidates(frequent_k: &[Episode]) -> Vec<Episode> {
    let mut sorted: Vec<&[EventType]> = frequent_k.iter().map(|e| e.nodes()).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let known: HashSet<&[EventType]> = sorted.iter().copied().collect();

    let mut out = Vec::new();
    let mut group_start = 0;
    while group_start < sorted.len() {
        let k = sorted[group_start].len();
        let prefix = &sorted[group_start][..k - 1];
        let mut group_end = group_start + 1;
        while group_end < sorted.len() && &sorted[group_end][..k - 1] == prefix {
            group_end += 1;
        }
        for a in group_start..group_end {
            for b in a + 1..group_end {
                let mut nodes = sorted[a].to_vec();
                nodes.push(sorted[b][k - 1]);
                let all_subsets_frequent = (0..nodes.len() - 2).all(|drop| {
                    let sub: Vec<EventType> = nodes
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &t)| t)
                        .collect();
                    known.contains(sub.as_slice())
                });
                if all_subsets_frequent {
                    out.push(Episode::parallel(nodes).expect("join of canonical episodes is canonical"));
                }
            }
        }
        group_start = group_end;
    }
    out
}

/// Level-wise discovery of frequent parallel episodes with expiry.
pub fn mine_parallel(seq: &EventSequence, config: &MiningConfig) -> Result<MinedLevels> {
    config.validate()?;
    let Some(expiry) = config.expiry else {
        return domain("parallel mining needs an expiry time");
    };
    let min = config.threshold_count(seq.len());
    let mut mined = MinedLevels {
        levels: BTreeMap::new(),
        truncated_at: None,
    };
    let mut candidates: Vec<Episode> = seq
        .alphabet()
        .types()
        .map(|t| Episode::parallel(vec![t]).expect("single node"))
        .collect();
    let mut size = 1;
    while !candidates.is_empty() && size <= config.max_size {
        if config.candidate_budget.is_some_and(|b| candidates.len() > b) {
            mined.truncated_at = Some(size);
            break;
        }
        let counts = count_parallel_all(&candidates, seq, expiry, config.record_occurrences)?;
        let mut frequent = filter_frequent(&candidates, counts, min)?;
        if frequent.is_empty() {
            break;
        }
        let next: Vec<Episode> = frequent.iter().map(|r| r.episode.clone()).collect();
        sort_results(&mut frequent);
        mined.levels.insert(size, frequent);
        candidates = generate_parallel_candidates(&next);
        size += 1;
    }
    Ok(mined)
}

/// Keeps only frequent episodes of size >= 2 that have no frequent strict
/// superset among `mined`.
pub fn maximal_episodes(mined: &MinedLevels) -> Vec<&FrequentEpisodeResult> {
    let by_size: HashMap<usize, &Vec<FrequentEpisodeResult>> = mined.levels.iter().map(|(k, v)| (*k, v)).collect();
    let mut out = Vec::new();
    for (&size, results) in &mined.levels {
        if size < 2 {
            continue;
        }
        for r in results {
            let has_superset = by_size.get(&(size + 1)).is_some_and(|sup| {
                sup.iter()
                    .any(|s| r.episode.is_subepisode_of(&s.episode).unwrap_or(false))
            });
            if !has_superset {
                out.push(r);
            }
        }
    }
    out
}
