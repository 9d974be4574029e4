//! Label-based JSON views of episodes and mining results.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::levels::MinedLevels;
use crate::model::{Alphabet, Episode, EpisodeKind, FrequentEpisodeResult, IntervalConstraint};
use crate::synfire::{Binding, SynfireResult};

pub const RESULTS_SCHEMA: &str = "epimine-results/1";
pub const SYNFIRE_SCHEMA: &str = "epimine-synfire/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeJson {
    pub kind: EpisodeKind,
    pub nodes: Vec<String>,
    #[serde(default)]
    pub intervals: Vec<IntervalConstraint>,
}

impl EpisodeJson {
    pub fn new(ep: &Episode, alphabet: &Alphabet) -> Self {
        EpisodeJson {
            kind: ep.kind(),
            nodes: ep.nodes().iter().map(|&t| alphabet.label(t).to_string()).collect(),
            intervals: ep.intervals().to_vec(),
        }
    }

    pub fn to_episode(&self, alphabet: &Alphabet) -> Result<Episode> {
        let nodes = self.nodes.iter().map(|l| alphabet.resolve(l)).collect::<Result<Vec<_>>>()?;
        match self.kind {
            EpisodeKind::Serial => Episode::serial(nodes, self.intervals.clone()),
            EpisodeKind::Parallel => Episode::parallel(nodes),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultJson {
    pub episode: EpisodeJson,
    pub display: String,
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occurrences: Option<Vec<Vec<usize>>>,
}

impl ResultJson {
    pub fn new(r: &FrequentEpisodeResult, alphabet: &Alphabet) -> Self {
        ResultJson {
            episode: EpisodeJson::new(&r.episode, alphabet),
            display: r.episode.display(alphabet).to_string(),
            count: r.count,
            occurrences: r
                .occurrences
                .as_ref()
                .map(|occ| occ.iter().map(|o| o.event_indices.clone()).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelJson {
    pub size: usize,
    pub episodes: Vec<ResultJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningOutput {
    pub schema: String,
    pub n_events: usize,
    pub threshold: u64,
    #[serde(default)]
    pub truncated_at: Option<usize>,
    pub levels: Vec<LevelJson>,
}

impl MiningOutput {
    pub fn new(mined: &MinedLevels, alphabet: &Alphabet, n_events: usize, threshold: u64) -> Self {
        MiningOutput {
            schema: RESULTS_SCHEMA.into(),
            n_events,
            threshold,
            truncated_at: mined.truncated_at,
            levels: levels_json(mined, alphabet),
        }
    }

    /// Episodes of one size, or of the largest size when `size` is `None`.
    pub fn episodes(&self, size: Option<usize>) -> impl Iterator<Item = &ResultJson> {
        let size = size.or_else(|| self.levels.iter().map(|l| l.size).max());
        self.levels
            .iter()
            .filter(move |l| Some(l.size) == size)
            .flat_map(|l| l.episodes.iter())
    }
}

fn levels_json(mined: &MinedLevels, alphabet: &Alphabet) -> Vec<LevelJson> {
    mined
        .levels
        .iter()
        .map(|(&size, rs)| LevelJson {
            size,
            episodes: rs.iter().map(|r| ResultJson::new(r, alphabet)).collect(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainJson {
    pub display: String,
    pub groups: Vec<Vec<String>>,
    pub intervals: Vec<IntervalConstraint>,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynfireOutput {
    pub schema: String,
    pub n_events: usize,
    pub n_substituted: usize,
    pub groups: Vec<ResultJson>,
    pub bindings: Vec<Binding>,
    pub longest_chains: Vec<ChainJson>,
    pub maximal_chains: Vec<ChainJson>,
    pub serial_levels: Vec<LevelJson>,
}

impl SynfireOutput {
    pub fn new(r: &SynfireResult, original: &Alphabet, n_events: usize) -> Self {
        let chain = |c: &FrequentEpisodeResult| ChainJson {
            display: r.display(c),
            groups: c
                .episode
                .nodes()
                .iter()
                .map(|&t| {
                    let label = r.substituted.alphabet().label(t);
                    match r.map.binding_for(label) {
                        Some(b) => b.members.clone(),
                        None => vec![label.to_string()],
                    }
                })
                .collect(),
            intervals: c.episode.intervals().to_vec(),
            count: c.count,
        };
        SynfireOutput {
            schema: SYNFIRE_SCHEMA.into(),
            n_events,
            n_substituted: r.substituted.len(),
            groups: r.groups.iter().map(|g| ResultJson::new(g, original)).collect(),
            bindings: r.map.bindings.clone(),
            longest_chains: r.longest_chains().iter().map(chain).collect(),
            maximal_chains: r.maximal_chains().into_iter().map(chain).collect(),
            serial_levels: levels_json(&r.serial, r.substituted.alphabet()),
        }
    }
}
