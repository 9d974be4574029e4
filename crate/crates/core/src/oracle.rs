//! Exhaustive reference counter for small sequences.
//!
//! Enumerates every occurrence of an episode that satisfies the given
//! constraints, then picks a largest pairwise non-overlapped subset with an
//! exact dynamic program over occurrence spans. It shares nothing with the
//! streaming automata beyond the interval membership test, which makes it
//! suitable for checking them.

use crate::error::{Error, Result};
use crate::model::{Episode, EpisodeKind, EventSequence, IntervalConstraint, OccurrenceRecord, TIME_TOLERANCE};

/// Largest sequence the oracle accepts.
pub const ORACLE_MAX_EVENTS: usize = 40;

/// Enumeration stops with a capacity error past this many partial matches.
const ORACLE_MAX_STEPS: u64 = 20_000_000;

/// Maximum number of pairwise non-overlapped occurrences of `episode`.
///
/// `intervals`, when given, replaces the episode's own inter-event
/// constraints (serial episodes only). `expiry` bounds the occurrence span
/// (last minus first event time), inclusive.
pub fn oracle_count(
    episode: &Episode,
    seq: &EventSequence,
    expiry: Option<f64>,
    intervals: Option<&[IntervalConstraint]>,
) -> Result<u64> {
    Ok(oracle_occurrences(episode, seq, expiry, intervals)?.len() as u64)
}

/// Like [`oracle_count`], also returning one optimal occurrence set.
pub fn oracle_occurrences(
    episode: &Episode,
    seq: &EventSequence,
    expiry: Option<f64>,
    intervals: Option<&[IntervalConstraint]>,
) -> Result<Vec<OccurrenceRecord>> {
    if seq.len() > ORACLE_MAX_EVENTS {
        return Err(Error::Capacity(format!(
            "oracle handles at most {ORACLE_MAX_EVENTS} events, got {}",
            seq.len()
        )));
    }
    let intervals = intervals.unwrap_or(episode.intervals());
    if episode.kind() == EpisodeKind::Parallel && !intervals.is_empty() {
        return Err(Error::Domain("parallel episodes take no interval constraints".into()));
    }
    if !intervals.is_empty() && intervals.len() + 1 != episode.len() {
        return Err(Error::Domain(format!(
            "{} intervals for a {}-node episode",
            intervals.len(),
            episode.len()
        )));
    }
    let occurrences = enumerate(episode, seq, expiry, intervals)?;
    Ok(max_non_overlapped(seq.len(), occurrences))
}

/// Every constraint-satisfying occurrence, as event positions in node order.
pub fn enumerate(
    episode: &Episode,
    seq: &EventSequence,
    expiry: Option<f64>,
    intervals: &[IntervalConstraint],
) -> Result<Vec<Vec<usize>>> {
    let mut search = Search {
        episode,
        seq,
        expiry,
        intervals,
        chosen: Vec::with_capacity(episode.len()),
        found: Vec::new(),
        steps: 0,
    };
    search.extend()?;
    Ok(search.found)
}

struct Search<'a> {
    episode: &'a Episode,
    seq: &'a EventSequence,
    expiry: Option<f64>,
    intervals: &'a [IntervalConstraint],
    chosen: Vec<usize>,
    found: Vec<Vec<usize>>,
    steps: u64,
}

impl Search<'_> {
    fn extend(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > ORACLE_MAX_STEPS {
            return Err(Error::Capacity("oracle enumeration budget exhausted".into()));
        }
        let depth = self.chosen.len();
        if depth == self.episode.len() {
            if self.within_expiry() {
                self.found.push(self.chosen.clone());
            }
            return Ok(());
        }
        let want = self.episode.nodes()[depth];
        let events = self.seq.events();
        // serial occurrences use strictly increasing positions; parallel
        // ones may pick events in any order
        let start = match self.episode.kind() {
            EpisodeKind::Serial => self.chosen.last().map_or(0, |&p| p + 1),
            EpisodeKind::Parallel => 0,
        };
        for pos in start..events.len() {
            if events[pos].etype != want {
                continue;
            }
            if self.episode.kind() == EpisodeKind::Serial && depth > 0 {
                if let Some(iv) = self.intervals.get(depth - 1) {
                    let prev = events[self.chosen[depth - 1]].time;
                    if !iv.contains(events[pos].time - prev) {
                        continue;
                    }
                }
            }
            self.chosen.push(pos);
            self.extend()?;
            self.chosen.pop();
        }
        Ok(())
    }

    fn within_expiry(&self) -> bool {
        let Some(tx) = self.expiry else { return true };
        let events = self.seq.events();
        let times = self.chosen.iter().map(|&p| events[p].time);
        let lo = times.clone().fold(f64::INFINITY, f64::min);
        let hi = times.fold(f64::NEG_INFINITY, f64::max);
        hi - lo <= tx + TIME_TOLERANCE
    }
}

/// Picks a largest subset of occurrences whose position spans are pairwise
/// disjoint. `best[p]` is the optimum using only events at positions >= p.
fn max_non_overlapped(n: usize, occurrences: Vec<Vec<usize>>) -> Vec<OccurrenceRecord> {
    let records: Vec<OccurrenceRecord> = occurrences
        .into_iter()
        .map(|event_indices| OccurrenceRecord { event_indices })
        .collect();
    let mut starting_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, r) in records.iter().enumerate() {
        starting_at[r.span().0].push(i);
    }
    let mut best = vec![0u64; n + 2];
    let mut choice: Vec<Option<usize>> = vec![None; n + 1];
    for p in (0..n).rev() {
        best[p] = best[p + 1];
        for &i in &starting_at[p] {
            let (_, hi) = records[i].span();
            let with = 1 + best[hi + 1];
            if with > best[p] {
                best[p] = with;
                choice[p] = Some(i);
            }
        }
    }
    let mut picked = Vec::new();
    let mut p = 0;
    while p < n {
        match choice[p] {
            Some(i) if best[p] != best[p + 1] => {
                let hi = records[i].span().1;
                picked.push(records[i].clone());
                p = hi + 1;
            }
            _ => p += 1,
        }
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::pairwise_non_overlapped;

    fn eq1() -> EventSequence {
        EventSequence::parse_str("A,1\nB,3\nD,4\nC,6\nA,12\nE,14\nB,15").unwrap()
    }

    fn serial(seq: &EventSequence, labels: &[&str], ivs: &[(f64, f64)]) -> Episode {
        let nodes = labels.iter().map(|l| seq.alphabet().resolve(l).unwrap()).collect();
        let ivs = ivs.iter().map(|&(l, h)| IntervalConstraint::new(l, h).unwrap()).collect();
        Episode::serial(nodes, ivs).unwrap()
    }

    #[test]
    fn serial_ab_on_example_sequence() {
        let seq = eq1();
        let ab = serial(&seq, &["A", "B"], &[]);
        // occurrences: (A1,B3) (A1,B15) (A12,B15); (A1,B3)+(A12,B15) disjoint
        assert_eq!(enumerate(&ab, &seq, None, &[]).unwrap().len(), 3);
        assert_eq!(oracle_count(&ab, &seq, None, None).unwrap(), 2);
    }

    #[test]
    fn one_node_is_histogram() {
        let seq = eq1();
        let a = serial(&seq, &["A"], &[]);
        assert_eq!(oracle_count(&a, &seq, None, None).unwrap(), 2);
    }

    #[test]
    fn tight_interval_kills_ab() {
        let seq = eq1();
        let ab = serial(&seq, &["A", "B"], &[(0.0, 1.0)]);
        assert_eq!(oracle_count(&ab, &seq, None, None).unwrap(), 0);
    }

    #[test]
    fn parallel_expiry_inclusive() {
        let seq = eq1();
        let a = seq.alphabet().resolve("A").unwrap();
        let b = seq.alphabet().resolve("B").unwrap();
        let ab = Episode::parallel(vec![a, b]).unwrap();
        assert_eq!(oracle_count(&ab, &seq, Some(2.0), None).unwrap(), 1);
        assert_eq!(oracle_count(&ab, &seq, Some(3.0), None).unwrap(), 2);
        assert_eq!(oracle_count(&ab, &seq, None, None).unwrap(), 2);
    }

    #[test]
    fn interval_example_sequence() {
        let seq = EventSequence::parse_str("A,1\nA,2\nB,4\nA,5\nC,10\nB,12\nC,13\nD,17").unwrap();
        let ep = serial(&seq, &["A", "B", "C", "D"], &[(0.0, 5.0), (5.0, 10.0), (0.0, 5.0)]);
        let occ = oracle_occurrences(&ep, &seq, None, None).unwrap();
        assert_eq!(occ.len(), 1);
        // every valid occurrence uses (B,4),(C,13),(D,17)
        let all = enumerate(&ep, &seq, None, ep.intervals()).unwrap();
        assert!(all.iter().all(|o| o[1..] == [2, 6, 7]));
        assert!(all.contains(&vec![1, 2, 6, 7]));
    }

    #[test]
    fn capacity_bound() {
        let text: String = (0..41).map(|i| format!("A,{i}\n")).collect();
        let seq = EventSequence::parse_str(&text).unwrap();
        let a = serial(&seq, &["A"], &[]);
        assert!(matches!(oracle_count(&a, &seq, None, None), Err(Error::Capacity(_))));
    }

    #[test]
    fn chosen_set_is_non_overlapped() {
        let seq = EventSequence::parse_str("A,0\nB,1\nA,2\nB,3\nA,4\nA,5\nB,6\nB,7").unwrap();
        let ab = serial(&seq, &["A", "B"], &[]);
        let occ = oracle_occurrences(&ab, &seq, None, None).unwrap();
        assert_eq!(occ.len(), 3);
        assert!(pairwise_non_overlapped(&occ));
    }
}
