//! Synfire chains: frequent synchronous groups strung together in time.
//!
//! Occurrences of the maximal frequent parallel episodes are collapsed into
//! single composite events, then serial mining runs on the rewritten stream.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::levels::MinedLevels;
use crate::model::{Alphabet, Episode, Event, EventSequence, EventType, FrequentEpisodeResult, MiningConfig};
use crate::parallel::{maximal_episodes, mine_parallel};
use crate::serial::mine_serial;

/// A fresh event type standing for a parallel episode.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Binding {
    pub label: String,
    /// Labels of the grouped event types, in canonical order.
    pub members: Vec<String>,
    pub count: u64,
}

/// One collapsed occurrence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Replacement {
    pub binding: usize,
    /// Positions in the original sequence.
    pub source_indices: Vec<usize>,
    pub time: f64,
    /// Position of the composite event in the rewritten sequence.
    pub output_index: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CompositeEventMap {
    pub bindings: Vec<Binding>,
    pub replacements: Vec<Replacement>,
}

impl CompositeEventMap {
    pub fn binding_for(&self, label: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.label == label)
    }
}

/// "[B C D]" for a parallel episode over B, C, D.
pub fn group_label(episode: &Episode, alphabet: &Alphabet) -> String {
    let names: Vec<&str> = episode.nodes().iter().map(|&t| alphabet.label(t)).collect();
    format!("[{}]", names.join(" "))
}

/// Replaces every recorded occurrence with one event of a fresh type placed
/// at the midpoint of the occurrence span.
pub fn substitute_occurrences(
    seq: &EventSequence,
    parallel_results: &[&FrequentEpisodeResult],
) -> Result<(EventSequence, CompositeEventMap)> {
    let events = seq.events();
    let original = seq.alphabet();

    let mut claimed: HashMap<usize, usize> = HashMap::new();
    let mut collisions = Vec::new();
    // (binding, sorted source indices)
    let mut occurrences: Vec<(usize, Vec<usize>)> = Vec::new();
    for (b, r) in parallel_results.iter().enumerate() {
        let Some(occ) = &r.occurrences else {
            return domain("parallel results need recorded occurrences for substitution");
        };
        for o in occ {
            let mut idx = o.event_indices.clone();
            idx.sort_unstable();
            for &i in &idx {
                if i >= events.len() {
                    return domain(format!("occurrence refers to event {i} beyond the sequence"));
                }
                if claimed.insert(i, occurrences.len()).is_some() {
                    collisions.push(i);
                }
            }
            occurrences.push((b, idx));
        }
    }
    if !collisions.is_empty() {
        collisions.sort_unstable();
        collisions.dedup();
        return Err(Error::Conflict { indices: collisions });
    }

    // types that lose all their events disappear from the alphabet
    let mut remaining = seq.histogram();
    for i in claimed.keys() {
        remaining[events[*i].etype.index()] -= 1;
    }
    let hist = seq.histogram();
    let mut alphabet = Alphabet::new();
    let mut remap: Vec<Option<EventType>> = vec![None; original.len()];
    for t in original.types() {
        if hist[t.index()] == 0 || remaining[t.index()] > 0 {
            remap[t.index()] = Some(alphabet.intern(original.label(t)));
        }
    }
    let mut bindings = Vec::new();
    let mut fresh_ids = Vec::new();
    for r in parallel_results {
        let mut label = group_label(&r.episode, original);
        let base = label.clone();
        let mut k = 2;
        while alphabet.get(&label).is_some() || original.get(&label).is_some() {
            label = format!("{base}#{k}");
            k += 1;
        }
        fresh_ids.push(alphabet.intern(&label));
        bindings.push(Binding {
            label,
            members: r.episode.nodes().iter().map(|&t| original.label(t).to_owned()).collect(),
            count: r.count,
        });
    }

    // (event, Some(occurrence)) in original order, synthetic ones placed
    // where their first source event was; a stable time sort then finishes
    let mut first_of: HashMap<usize, usize> = HashMap::new();
    for (o, (_, idx)) in occurrences.iter().enumerate() {
        first_of.insert(idx[0], o);
    }
    let mut staged: Vec<(Event, Option<usize>)> = Vec::with_capacity(events.len());
    for (i, ev) in events.iter().enumerate() {
        if let Some(&o) = first_of.get(&i) {
            let (b, idx) = &occurrences[o];
            let lo = events[idx[0]].time;
            let hi = idx.iter().map(|&j| events[j].time).fold(lo, f64::max);
            let mid = ((lo + hi) / 2.0 * 1e9).round() / 1e9;
            staged.push((
                Event {
                    etype: fresh_ids[*b],
                    time: mid,
                },
                Some(o),
            ));
        }
        if !claimed.contains_key(&i) {
            let etype = remap[ev.etype.index()].expect("unconsumed type kept");
            staged.push((Event { etype, time: ev.time }, None));
        }
    }
    staged.sort_by(|a, b| a.0.time.total_cmp(&b.0.time));

    let mut replacements = vec![None; occurrences.len()];
    for (pos, (ev, o)) in staged.iter().enumerate() {
        if let Some(o) = *o {
            let (b, idx) = &occurrences[o];
            replacements[o] = Some(Replacement {
                binding: *b,
                source_indices: idx.clone(),
                time: ev.time,
                output_index: pos,
            });
        }
    }
    let out = EventSequence::new(alphabet, staged.into_iter().map(|(e, _)| e).collect())?;
    Ok((
        out,
        CompositeEventMap {
            bindings,
            replacements: replacements.into_iter().map(|r| r.expect("every occurrence placed")).collect(),
        },
    ))
}

#[derive(Clone, Debug)]
pub struct SynfireResult {
    pub parallel: MinedLevels,
    /// Parallel episodes that were collapsed, most frequent first.
    pub groups: Vec<FrequentEpisodeResult>,
    pub substituted: EventSequence,
    pub map: CompositeEventMap,
    pub serial: MinedLevels,
}

impl SynfireResult {
    /// Frequent serial episodes of the largest size found.
    pub fn longest_chains(&self) -> &[FrequentEpisodeResult] {
        self.serial.max_level().map_or(&[], |k| self.serial.level(k))
    }

    /// Serial episodes no other frequent serial episode extends at either end.
    pub fn maximal_chains(&self) -> Vec<&FrequentEpisodeResult> {
        let mut extended: HashSet<(Vec<EventType>, Vec<(u64, u64)>)> = Default::default();
        for r in self.serial.iter() {
            let ep = &r.episode;
            if ep.len() < 2 {
                continue;
            }
            let n = ep.len();
            let key = |nodes: &[EventType], ivs: &[crate::model::IntervalConstraint]| {
                (
                    nodes.to_vec(),
                    ivs.iter().map(|iv| (iv.low().to_bits(), iv.high().to_bits())).collect::<Vec<_>>(),
                )
            };
            let ivs = ep.intervals();
            extended.insert(key(&ep.nodes()[..n - 1], if ivs.is_empty() { ivs } else { &ivs[..n - 2] }));
            extended.insert(key(&ep.nodes()[1..], if ivs.is_empty() { ivs } else { &ivs[1..] }));
        }
        self.serial
            .iter()
            .filter(|r| r.episode.len() >= 2)
            .filter(|r| {
                let k = (
                    r.episode.nodes().to_vec(),
                    r.episode
                        .intervals()
                        .iter()
                        .map(|iv| (iv.low().to_bits(), iv.high().to_bits()))
                        .collect::<Vec<_>>(),
                );
                !extended.contains(&k)
            })
            .collect()
    }

    pub fn display(&self, r: &FrequentEpisodeResult) -> String {
        r.episode.display(self.substituted.alphabet()).to_string()
    }
}

/// Parallel mining, substitution of the maximal groups, then serial mining.
pub fn mine_synfire(seq: &EventSequence, parallel_cfg: &MiningConfig, serial_cfg: &MiningConfig) -> Result<SynfireResult> {
    if !parallel_cfg.record_occurrences {
        return domain("synfire mining needs parallel occurrences recorded");
    }
    let parallel = mine_parallel(seq, parallel_cfg)?;
    let chosen = maximal_episodes(&parallel);
    let (substituted, map) = substitute_occurrences(seq, &chosen)?;
    let groups: Vec<FrequentEpisodeResult> = chosen.into_iter().cloned().collect();
    let serial = mine_serial(&substituted, serial_cfg)?;
    Ok(SynfireResult {
        parallel,
        groups,
        substituted,
        map,
        serial,
    })
}

/// Splits a rendered chain like "A [C B D] E" into its groups, each sorted,
/// so chains can be compared irrespective of the order inside brackets.
pub fn chain_groups(rendered: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut rest = rendered.trim();
    while !rest.is_empty() {
        if let Some(inner) = rest.strip_prefix('[') {
            let end = inner.find(']').unwrap_or(inner.len());
            let mut g: Vec<String> = inner[..end].split_whitespace().map(str::to_owned).collect();
            g.sort();
            out.push(g);
            rest = inner.get(end + 1..).unwrap_or("").trim_start();
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let token = &rest[..end];
            // arrows from interval rendering carry no group information
            if !token.starts_with('-') {
                out.push(vec![token.to_owned()]);
            }
            rest = rest[end..].trim_start();
        }
    }
    out
}
