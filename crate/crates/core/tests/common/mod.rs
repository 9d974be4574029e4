#![allow(dead_code)]

use epimine::{Alphabet, Episode, Event, EventSequence, EventType, IntervalConstraint};
use proptest::prelude::*;

pub fn iv(low: f64, high: f64) -> IntervalConstraint {
    IntervalConstraint::new(low, high).unwrap()
}

pub fn sequence(alphabet_size: usize, events: &[(u32, u32)]) -> EventSequence {
    let labels: Vec<String> = (0..alphabet_size).map(|i| ((b'A' + i as u8) as char).to_string()).collect();
    let mut evs: Vec<Event> = events
        .iter()
        .map(|&(t, ms)| Event {
            etype: EventType(t),
            time: ms as f64 * 0.001,
        })
        .collect();
    evs.sort_by(|a, b| a.time.total_cmp(&b.time));
    EventSequence::new(Alphabet::from_labels(labels).unwrap(), evs).unwrap()
}

/// Small sequences on a millisecond grid, so ties and interval boundaries
/// come up often.
pub fn small_sequence(max_events: usize) -> impl Strategy<Value = EventSequence> {
    (1usize..=5).prop_flat_map(move |k| {
        prop::collection::vec((0..k as u32, 0u32..40), 0..=max_events).prop_map(move |evs| sequence(k, &evs))
    })
}

pub fn all_serial(k: usize, size: usize) -> Vec<Vec<EventType>> {
    let mut out = vec![Vec::new()];
    for _ in 0..size {
        out = out
            .into_iter()
            .flat_map(|p: Vec<EventType>| {
                (0..k as u32).map(move |t| {
                    let mut q = p.clone();
                    q.push(EventType(t));
                    q
                })
            })
            .collect();
    }
    out
}

pub fn all_parallel(k: usize, size: usize) -> Vec<Episode> {
    all_serial(k, size)
        .into_iter()
        .filter(|p| p.windows(2).all(|w| w[0] < w[1]))
        .map(|p| Episode::parallel(p).unwrap())
        .collect()
}

/// Every assignment of `set` members to the `edges` edges.
pub fn interval_assignments(set: &[IntervalConstraint], edges: usize) -> Vec<Vec<IntervalConstraint>> {
    let mut out = vec![Vec::new()];
    for _ in 0..edges {
        out = out
            .into_iter()
            .flat_map(|p: Vec<IntervalConstraint>| {
                set.iter().map(move |iv| {
                    let mut q = p.clone();
                    q.push(*iv);
                    q
                })
            })
            .collect();
    }
    out
}
