use std::collections::BTreeMap;

use crate::model::FrequentEpisodeResult;

/// Frequent episodes found by a level-wise run, keyed by episode size.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MinedLevels {
    pub levels: BTreeMap<usize, Vec<FrequentEpisodeResult>>,
    /// Level whose candidate set exceeded the configured budget, if any.
    /// Mining stopped before counting that level.
    pub truncated_at: Option<usize>,
}

impl MinedLevels {
    pub fn level(&self, size: usize) -> &[FrequentEpisodeResult] {
        self.levels.get(&size).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest size with at least one frequent episode.
    pub fn max_level(&self) -> Option<usize> {
        self.levels.iter().rev().find(|(_, v)| !v.is_empty()).map(|(k, _)| *k)
    }

    pub fn iter(&self) -> impl Iterator<Item = &FrequentEpisodeResult> {
        self.levels.values().flatten()
    }
}

/// Most frequent first; ties broken by node ids then interval bounds.
pub(crate) fn sort_results(results: &mut [FrequentEpisodeResult]) {
    results.sort_by(|a, b| {
        b.count
            .cmp(&a.count)
            .then_with(|| a.episode.nodes().cmp(b.episode.nodes()))
            .then_with(|| {
                let ka = a.episode.intervals().iter().map(|iv| (iv.low(), iv.high()));
                let kb = b.episode.intervals().iter().map(|iv| (iv.low(), iv.high()));
                ka.partial_cmp(kb).unwrap_or(std::cmp::Ordering::Equal)
            })
    });
}
