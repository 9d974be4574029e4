//! Serial episodes with per-edge inter-event interval constraints.
//!
//! Each candidate is a chain of node trackers. Tracker `j` keeps the times of
//! every sighting of its event type that could be paired, within the
//! constraint of edge `j-1`, with some accepted sighting at tracker `j-1`.
//! The first sighting accepted by the last tracker completes an occurrence;
//! the candidate then forgets everything it remembered, so counted
//! occurrences never overlap.
//!
//! Entries are pruned once the gap to the current event exceeds the upper
//! bound of the outgoing edge: times only grow, so they can never pair again.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{domain, Result};
use crate::levels::{sort_results, MinedLevels};
use crate::model::{
    normalize_interval_set, threshold_count, Episode, EpisodeKind, EventSequence, EventType,
    FrequentEpisodeResult, IntervalConstraint, MiningConfig, OccurrenceRecord,
};

#[derive(Clone, Copy, Debug)]
struct TimeEntry {
    time: f64,
    /// Slot in the candidate's back-reference arena.
    slot: u32,
}

#[derive(Clone, Copy, Debug)]
struct BackRef {
    event: usize,
    prev: Option<u32>,
}

#[derive(Debug, Default)]
struct SerialState {
    arena: Vec<BackRef>,
    freq: u64,
    occurrences: Vec<OccurrenceRecord>,
}

impl SerialState {
    fn backtrack(&self, last_event: usize, prev: Option<u32>) -> OccurrenceRecord {
        let mut indices = vec![last_event];
        let mut cur = prev;
        while let Some(slot) = cur {
            let b = self.arena[slot as usize];
            indices.push(b.event);
            cur = b.prev;
        }
        indices.reverse();
        OccurrenceRecord { event_indices: indices }
    }
}

/// One node of one candidate, as seen from its event type.
#[derive(Clone, Copy, Debug)]
struct Wait {
    cand: u32,
    /// Index into the flat tracker arrays.
    node: u32,
    first: bool,
    last: bool,
}

/// Options for [`count_serial_with`].
#[derive(Clone, Copy, Debug)]
pub struct SerialCountOptions {
    pub record_occurrences: bool,
    /// Drop tlist entries that can no longer pair. Turning this off changes
    /// memory use only, never counts.
    pub prune: bool,
}

impl Default for SerialCountOptions {
    fn default() -> Self {
        SerialCountOptions {
            record_occurrences: false,
            prune: true,
        }
    }
}

/// Raw counts for every candidate, in input order.
///
/// Candidates either carry one interval per edge or none at all; an
/// unconstrained serial episode accepts any gap between strictly increasing
/// event positions.
pub fn count_serial_with(
    candidates: &[Episode],
    seq: &EventSequence,
    opts: SerialCountOptions,
) -> Result<Vec<(u64, Option<Vec<OccurrenceRecord>>)>> {
    let mut waits: Vec<Vec<Wait>> = vec![Vec::new(); seq.alphabet().len()];
    // trackers of all candidates laid out back to back; `in_edge[g]` is the
    // constraint between tracker `g - 1` and `g`
    let mut tlists: Vec<VecDeque<TimeEntry>> = Vec::new();
    let mut in_edge: Vec<Option<IntervalConstraint>> = Vec::new();
    let mut base = Vec::with_capacity(candidates.len());
    for (c, ep) in candidates.iter().enumerate() {
        if ep.kind() != EpisodeKind::Serial {
            return domain("count_serial needs serial episodes");
        }
        if !ep.intervals().is_empty() && ep.intervals().len() + 1 != ep.len() {
            return domain("serial candidate interval count does not match its size");
        }
        let b = tlists.len();
        base.push(b);
        // later nodes first, so one event never plays two roles in the
        // same occurrence
        for (n, &t) in ep.nodes().iter().enumerate().rev() {
            if t.index() >= waits.len() {
                return domain(format!("event type id {} outside the sequence alphabet", t.0));
            }
            waits[t.index()].push(Wait {
                cand: c as u32,
                node: (b + n) as u32,
                first: n == 0,
                last: n + 1 == ep.len(),
            });
        }
        for n in 0..ep.len() {
            tlists.push(VecDeque::new());
            in_edge.push(n.checked_sub(1).and_then(|k| ep.intervals().get(k).copied()));
        }
    }
    let mut states: Vec<SerialState> = (0..candidates.len()).map(|_| SerialState::default()).collect();

    for (i, ev) in seq.events().iter().enumerate() {
        let t = ev.time;
        let mut completed: Option<u32> = None;
        for w in &waits[ev.etype.index()] {
            if completed == Some(w.cand) {
                continue;
            }
            let g = w.node as usize;
            if !w.first && tlists[g - 1].is_empty() {
                continue;
            }

            let prev_slot = if w.first {
                None
            } else {
                match find_licensing(&mut tlists[g - 1], t, in_edge[g].as_ref(), opts.prune) {
                    Some(entry) => Some(entry.slot),
                    None => continue,
                }
            };

            let st = &mut states[w.cand as usize];
            if w.last {
                st.freq += 1;
                if opts.record_occurrences {
                    let occ = st.backtrack(i, prev_slot);
                    st.occurrences.push(occ);
                }
                let b = base[w.cand as usize];
                for tl in &mut tlists[b..=g] {
                    tl.clear();
                }
                st.arena.clear();
                completed = Some(w.cand);
                continue;
            }

            let out_edge = in_edge[g + 1];
            let tl = &mut tlists[g];
            if opts.prune {
                if let Some(iv) = out_edge {
                    while tl.front().is_some_and(|e| iv.expired(t - e.time)) {
                        tl.pop_front();
                    }
                }
            }
            // without a constraint on the outgoing edge every licensed entry
            // is interchangeable, so the earliest one is enough
            if out_edge.is_none() && !tl.is_empty() {
                continue;
            }
            let slot = if opts.record_occurrences {
                st.arena.push(BackRef {
                    event: i,
                    prev: prev_slot,
                });
                (st.arena.len() - 1) as u32
            } else {
                0
            };
            tl.push_back(TimeEntry { time: t, slot });
        }
    }

    Ok(states
        .into_iter()
        .map(|st| (st.freq, opts.record_occurrences.then_some(st.occurrences)))
        .collect())
}

/// Earliest entry of `tlist` whose gap to `t` satisfies `edge`. Entries are
/// in nondecreasing time order, so gaps shrink along the list.
fn find_licensing(
    tlist: &mut VecDeque<TimeEntry>,
    t: f64,
    edge: Option<&IntervalConstraint>,
    prune: bool,
) -> Option<TimeEntry> {
    let Some(iv) = edge else {
        return tlist.front().copied();
    };
    if prune {
        while tlist.front().is_some_and(|e| iv.expired(t - e.time)) {
            tlist.pop_front();
        }
    }
    for e in tlist.iter() {
        let gap = t - e.time;
        if iv.expired(gap) {
            continue;
        }
        if iv.contains(gap) {
            return Some(*e);
        }
        // gap <= low here, and later entries only have smaller gaps
        break;
    }
    None
}

pub fn count_serial_all(
    candidates: &[Episode],
    seq: &EventSequence,
    record_occurrences: bool,
) -> Result<Vec<(u64, Option<Vec<OccurrenceRecord>>)>> {
    count_serial_with(
        candidates,
        seq,
        SerialCountOptions {
            record_occurrences,
            prune: true,
        },
    )
}

/// Counts `candidates` in one pass and keeps those reaching
/// `ceil(n * threshold_fraction)`.
pub fn count_serial(
    candidates: &[Episode],
    seq: &EventSequence,
    threshold_fraction: f64,
) -> Result<Vec<FrequentEpisodeResult>> {
    for ep in candidates {
        if ep.intervals().len() + 1 != ep.len() {
            return domain(format!(
                "serial candidate with {} nodes needs {} intervals, got {}",
                ep.len(),
                ep.len() - 1,
                ep.intervals().len()
            ));
        }
    }
    let min = threshold_count(seq.len(), threshold_fraction, None);
    let counts = count_serial_all(candidates, seq, false)?;
    Ok(filter_frequent(candidates, counts, min))
}

fn filter_frequent(
    candidates: &[Episode],
    counts: Vec<(u64, Option<Vec<OccurrenceRecord>>)>,
    min: u64,
) -> Vec<FrequentEpisodeResult> {
    candidates
        .iter()
        .zip(counts)
        .filter(|(_, (count, _))| *count >= min)
        .map(|(ep, (count, occurrences))| FrequentEpisodeResult {
            episode: ep.clone(),
            count,
            occurrences,
        })
        .collect()
}

/// Hashable identity of an episode fragment (node ids plus interval bits).
type FragmentKey = (Vec<EventType>, Vec<(u64, u64)>);

fn fragment_key(nodes: &[EventType], intervals: &[IntervalConstraint]) -> FragmentKey {
    (
        nodes.to_vec(),
        intervals.iter().map(|iv| (iv.low().to_bits(), iv.high().to_bits())).collect(),
    )
}

/// Joins frequent k-node serial episodes `alpha`, `beta` whenever `alpha`
/// without its first node equals `beta` without its last node (intervals
/// included). The candidate is `alpha` extended by `beta`'s last node and
/// last interval. Only prefix and suffix subepisodes are required to be
/// frequent; other subepisodes have no meaningful interval annotation.
pub fn generate_serial_candidates(frequent_k: &[Episode]) -> Vec<Episode> {
    let mut by_prefix: HashMap<FragmentKey, Vec<&Episode>> = HashMap::new();
    for beta in frequent_k {
        let k = beta.len();
        if k < 2 || beta.intervals().len() != k - 1 {
            continue;
        }
        by_prefix
            .entry(fragment_key(&beta.nodes()[..k - 1], &beta.intervals()[..k - 2]))
            .or_default()
            .push(beta);
    }
    let mut out = Vec::new();
    for alpha in frequent_k {
        let k = alpha.len();
        if k < 2 || alpha.intervals().len() != k - 1 {
            continue;
        }
        let key = fragment_key(&alpha.nodes()[1..], &alpha.intervals()[1..]);
        let Some(betas) = by_prefix.get(&key) else { continue };
        for beta in betas {
            let mut nodes = alpha.nodes().to_vec();
            nodes.push(beta.nodes()[k - 1]);
            let mut intervals = alpha.intervals().to_vec();
            intervals.push(beta.intervals()[k - 2]);
            out.push(Episode::serial(nodes, intervals).expect("join keeps interval count"));
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|e| seen.insert(fragment_key(e.nodes(), e.intervals())));
    out
}

/// All 2-node candidates `X -> Y` over `types` for every interval in the set.
pub fn seed_serial_candidates(types: &[EventType], interval_set: &[IntervalConstraint]) -> Result<Vec<Episode>> {
    if interval_set.is_empty() {
        return domain("serial mining needs at least one candidate interval");
    }
    let mut out = Vec::with_capacity(types.len() * types.len() * interval_set.len());
    for &x in types {
        for &y in types {
            for &iv in interval_set {
                out.push(Episode::serial(vec![x, y], vec![iv])?);
            }
        }
    }
    Ok(out)
}

/// Level-wise discovery of frequent serial episodes, choosing for each edge
/// whichever candidate intervals make the episode frequent.
pub fn mine_serial(seq: &EventSequence, config: &MiningConfig) -> Result<MinedLevels> {
    config.validate()?;
    let intervals = normalize_interval_set(config.candidate_intervals.clone())?;
    if intervals.is_empty() {
        return domain("serial mining needs at least one candidate interval");
    }
    let min = config.threshold_count(seq.len());
    let mut mined = MinedLevels {
        levels: BTreeMap::new(),
        truncated_at: None,
    };

    let singles: Vec<Episode> = seq
        .alphabet()
        .types()
        .map(|t| Episode::serial(vec![t], vec![]).expect("single node"))
        .collect();
    let counts = count_serial_all(&singles, seq, config.record_occurrences)?;
    let mut frequent = filter_frequent(&singles, counts, min);
    if frequent.is_empty() {
        return Ok(mined);
    }
    let types: Vec<EventType> = frequent.iter().map(|r| r.episode.nodes()[0]).collect();
    sort_results(&mut frequent);
    mined.levels.insert(1, frequent);

    let mut candidates = seed_serial_candidates(&types, &intervals)?;
    let mut size = 2;
    while !candidates.is_empty() && size <= config.max_size {
        if config.candidate_budget.is_some_and(|b| candidates.len() > b) {
            mined.truncated_at = Some(size);
            break;
        }
        let counts = count_serial_all(&candidates, seq, config.record_occurrences)?;
        let mut frequent = filter_frequent(&candidates, counts, min);
        if frequent.is_empty() {
            break;
        }
        let next: Vec<Episode> = frequent.iter().map(|r| r.episode.clone()).collect();
        sort_results(&mut frequent);
        mined.levels.insert(size, frequent);
        candidates = generate_serial_candidates(&next);
        size += 1;
    }
    Ok(mined)
}
