//! Frequency statistics over ensembles of surrogate and patterned datasets.
//!
//! Null datasets are mined exhaustively (every episode occurring at least
//! once) and the largest frequency per episode size is recorded. Patterned
//! datasets record, per size, the smallest frequency among the subepisodes
//! of the embedded pattern.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::levels::MinedLevels;
use crate::model::{Episode, EpisodeKind, EventSequence, IntervalConstraint, MiningConfig};
use crate::parallel::{count_parallel_all, mine_parallel};
use crate::serial::{count_serial_all, mine_serial};
use crate::simulator::{
    build_network, embed_pattern, generate_null_dataset, setup_rng, simulate, ConnectionScheme, NullKind,
    NullParams, PatternKind, PatternSpec, SimParams,
};

/// Default cap on candidates per level when mining surrogates exhaustively.
pub const DEFAULT_CANDIDATE_BUDGET: usize = 1_000_000;

/// What to mine and under which temporal constraint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMining {
    pub kind: EpisodeKind,
    /// Expiry for parallel episodes.
    #[serde(default)]
    pub expiry: Option<f64>,
    /// Candidate intervals for serial episodes.
    #[serde(default)]
    pub intervals: Vec<IntervalConstraint>,
    pub max_size: usize,
    pub candidate_budget: usize,
}

impl EnsembleMining {
    pub fn parallel(expiry: f64, max_size: usize) -> Self {
        EnsembleMining {
            kind: EpisodeKind::Parallel,
            expiry: Some(expiry),
            intervals: Vec::new(),
            max_size,
            candidate_budget: DEFAULT_CANDIDATE_BUDGET,
        }
    }

    pub fn serial(intervals: Vec<IntervalConstraint>, max_size: usize) -> Self {
        EnsembleMining {
            kind: EpisodeKind::Serial,
            expiry: None,
            intervals,
            max_size,
            candidate_budget: DEFAULT_CANDIDATE_BUDGET,
        }
    }

    /// Every episode that occurs at all. A minimum count of one finds the same
    /// per-size maxima as a zero threshold, since anything with a nonzero
    /// count has all its generating subepisodes nonzero too.
    fn exhaustive_config(&self) -> MiningConfig {
        MiningConfig {
            threshold_fraction: 0.0,
            min_count: Some(1),
            expiry: self.expiry,
            candidate_intervals: self.intervals.clone(),
            max_size: self.max_size,
            record_occurrences: false,
            candidate_budget: Some(self.candidate_budget),
        }
    }

    fn mine(&self, seq: &EventSequence) -> Result<MinedLevels> {
        let cfg = self.exhaustive_config();
        match self.kind {
            EpisodeKind::Parallel => mine_parallel(seq, &cfg),
            EpisodeKind::Serial => mine_serial(seq, &cfg),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_size == 0 {
            return domain("max_size must be positive");
        }
        match self.kind {
            EpisodeKind::Parallel if self.expiry.is_none() => domain("parallel ensembles need an expiry"),
            EpisodeKind::Serial if self.intervals.is_empty() => domain("serial ensembles need intervals"),
            _ => Ok(()),
        }
    }
}

/// Per-dataset, per-size statistic: `values[dataset][size - 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyStats {
    pub max_size: usize,
    pub values: Vec<Vec<u64>>,
    /// Datasets whose mining hit the candidate budget.
    pub truncated: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StatsRow {
    pub size: usize,
    pub avg: f64,
    pub max: u64,
    pub min: u64,
}

impl FrequencyStats {
    pub fn from_values(max_size: usize, values: Vec<Vec<u64>>) -> Result<Self> {
        if values.is_empty() {
            return domain("need at least one dataset");
        }
        if values.iter().any(|v| v.len() != max_size) {
            return domain("every dataset needs one value per size");
        }
        Ok(FrequencyStats {
            max_size,
            values,
            truncated: Vec::new(),
        })
    }

    pub fn sample_size(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, size: usize) -> Result<StatsRow> {
        if size == 0 || size > self.max_size {
            return domain(format!("size {size} outside 1..={}", self.max_size));
        }
        let col: Vec<u64> = self.values.iter().map(|v| v[size - 1]).collect();
        Ok(StatsRow {
            size,
            avg: col.iter().sum::<u64>() as f64 / col.len() as f64,
            max: *col.iter().max().expect("nonempty"),
            min: *col.iter().min().expect("nonempty"),
        })
    }

    pub fn rows(&self) -> Vec<StatsRow> {
        (1..=self.max_size).map(|k| self.row(k).expect("in range")).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema: epimine-stats/1\nsize,avg,max,min,sample_size\n");
        for r in self.rows() {
            out += &format!("{},{:.2},{},{},{}\n", r.size, r.avg, r.max, r.min, self.sample_size());
        }
        out
    }
}

/// Largest frequency per size in one mined dataset (0 where nothing occurs).
pub fn max_per_size(seq: &EventSequence, mined: &MinedLevels, max_size: usize) -> Vec<u64> {
    (1..=max_size)
        .map(|k| {
            if k == 1 {
                return seq.histogram().into_iter().max().unwrap_or(0);
            }
            mined.level(k).iter().map(|r| r.count).max().unwrap_or(0)
        })
        .collect()
}

fn dataset_seed(base: u64, index: usize) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64 + 1)
}

/// Parameters of null dataset `index`: kinds rotate, and random networks
/// use `c = 0.5` in the first half of the ensemble and `0.75` in the second.
pub fn null_dataset_params(
    kinds: &[NullKind],
    n_datasets: usize,
    index: usize,
    sim: &SimParams,
    base_seed: u64,
) -> (NullKind, SimParams) {
    let kind = kinds[index % kinds.len()];
    let c = if index < n_datasets / 2 { 0.5 } else { 0.75 };
    let params = SimParams {
        c,
        seed: dataset_seed(base_seed, index),
        ..sim.clone()
    };
    (kind, params)
}

/// Mines `n_datasets` surrogate datasets and tabulates the largest frequency
/// per episode size.
pub fn null_ensemble_stats(
    kinds: &[NullKind],
    n_datasets: usize,
    mining: &EnsembleMining,
    sim: &SimParams,
    null: &NullParams,
    base_seed: u64,
) -> Result<FrequencyStats> {
    if kinds.is_empty() || n_datasets == 0 {
        return domain("need at least one null kind and one dataset");
    }
    mining.validate()?;
    let per: Vec<(Vec<u64>, bool)> = (0..n_datasets)
        .into_par_iter()
        .map(|i| {
            let (kind, params) = null_dataset_params(kinds, n_datasets, i, sim, base_seed);
            let seq = generate_null_dataset(kind, &params, null)?;
            let mined = mining.mine(&seq)?;
            Ok((max_per_size(&seq, &mined, mining.max_size), mined.truncated_at.is_some()))
        })
        .collect::<Result<_>>()?;
    let truncated = per.iter().enumerate().filter(|(_, p)| p.1).map(|(i, _)| i).collect();
    let mut stats = FrequencyStats::from_values(mining.max_size, per.into_iter().map(|p| p.0).collect())?;
    stats.truncated = truncated;
    Ok(stats)
}

/// The episode a pattern is expected to produce: the driven group of a
/// synchrony pattern (parallel) or the chain of an order pattern (serial).
pub fn pattern_target(spec: &PatternSpec) -> Result<(EpisodeKind, Vec<String>)> {
    match spec.kind {
        PatternKind::Synchrony => Ok((EpisodeKind::Parallel, spec.members().cloned().collect())),
        PatternKind::Order => Ok((EpisodeKind::Serial, spec.groups.iter().flatten().cloned().collect())),
        PatternKind::Synfire => domain("synfire patterns have no single target episode"),
    }
}

/// All size-`k` subepisodes of the target: subsets for parallel, contiguous
/// sub-chains for serial (one interval on every edge).
fn target_subepisodes(
    seq: &EventSequence,
    kind: EpisodeKind,
    labels: &[String],
    k: usize,
    interval: Option<IntervalConstraint>,
) -> Result<Vec<Episode>> {
    let ids = labels.iter().map(|l| seq.alphabet().resolve(l)).collect::<Result<Vec<_>>>()?;
    match kind {
        EpisodeKind::Parallel => ids
            .iter()
            .copied()
            .combinations(k)
            .map(Episode::parallel)
            .collect(),
        EpisodeKind::Serial => {
            let iv = interval.ok_or_else(|| crate::error::Error::Domain("serial targets need an interval".into()))?;
            ids.windows(k).map(|w| Episode::serial(w.to_vec(), vec![iv; k - 1])).collect()
        }
    }
}

/// Smallest frequency per size among the target's subepisodes.
pub fn min_target_per_size(
    seq: &EventSequence,
    kind: EpisodeKind,
    labels: &[String],
    mining: &EnsembleMining,
) -> Result<Vec<u64>> {
    let hist = seq.histogram();
    let mut out = Vec::with_capacity(mining.max_size);
    for k in 1..=mining.max_size {
        if k > labels.len() {
            out.push(0);
            continue;
        }
        if k == 1 {
            let m = labels
                .iter()
                .map(|l| seq.alphabet().resolve(l).map(|t| hist[t.index()]))
                .collect::<Result<Vec<_>>>()?;
            out.push(m.into_iter().min().unwrap_or(0));
            continue;
        }
        let counts = match kind {
            EpisodeKind::Parallel => {
                let cands = target_subepisodes(seq, kind, labels, k, None)?;
                count_parallel_all(&cands, seq, mining.expiry.unwrap_or(0.0), false)?
            }
            EpisodeKind::Serial => {
                let cands = target_subepisodes(seq, kind, labels, k, mining.intervals.first().copied())?;
                count_serial_all(&cands, seq, false)?
            }
        };
        out.push(counts.into_iter().map(|c| c.0).min().unwrap_or(0));
    }
    Ok(out)
}

/// Simulates `n_datasets` networks with `specs` embedded and tabulates the
/// smallest target-subepisode frequency per size. The target is taken from
/// the first spec.
pub fn pattern_ensemble_stats(
    specs: &[PatternSpec],
    n_datasets: usize,
    mining: &EnsembleMining,
    sim: &SimParams,
    scheme: ConnectionScheme,
    base_seed: u64,
) -> Result<FrequencyStats> {
    let Some(first) = specs.first() else {
        return domain("need at least one pattern");
    };
    if n_datasets == 0 {
        return domain("need at least one dataset");
    }
    mining.validate()?;
    let (kind, labels) = pattern_target(first)?;
    if kind != mining.kind {
        return domain("pattern target and mining kind differ");
    }
    let values = (0..n_datasets)
        .into_par_iter()
        .map(|i| {
            let params = SimParams {
                seed: dataset_seed(base_seed ^ 0x5A5A, i),
                ..sim.clone()
            };
            let mut net = build_network(&params, scheme, &mut setup_rng(params.seed))?;
            for s in specs {
                net = embed_pattern(&net, s, &params)?;
            }
            let seq = simulate(&net, &params)?;
            min_target_per_size(&seq, kind, &labels, mining)
        })
        .collect::<Result<Vec<_>>>()?;
    FrequencyStats::from_values(mining.max_size, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PValue {
    pub p: f64,
    /// Null datasets whose statistic reached the observed frequency.
    pub exceedances: usize,
}

/// Add-one surrogate p-value of observing `observed` at `size`.
pub fn p_value(observed: u64, size: usize, null_stats: &FrequencyStats) -> Result<PValue> {
    null_stats.row(size)?;
    let exceedances = null_stats.values.iter().filter(|v| v[size - 1] >= observed).count();
    Ok(PValue {
        p: (exceedances + 1) as f64 / (null_stats.sample_size() + 1) as f64,
        exceedances,
    })
}

/// Count threshold per size: `ceil(factor * max)`, at least 1.
pub fn calibrate_threshold(null_stats: &FrequencyStats, safety_factor: f64) -> Result<Vec<u64>> {
    if !(safety_factor >= 1.0) {
        return domain(format!("safety factor must be at least 1, got {safety_factor}"));
    }
    Ok(null_stats
        .rows()
        .iter()
        .map(|r| ((r.max as f64 * safety_factor - 1e-9).ceil() as u64).max(1))
        .collect())
}

/// For each edge `X -> Y` of a serial episode, frequency of the two-node
/// episode (same interval) divided by the frequency of `X`. `None` where `X`
/// never occurs.
pub fn confidence_ratio(seq: &EventSequence, episode: &Episode) -> Result<Vec<Option<f64>>> {
    if episode.kind() != EpisodeKind::Serial {
        return domain("confidence ratios are defined for serial episodes");
    }
    let hist = seq.histogram();
    let nodes = episode.nodes();
    let mut pairs = Vec::new();
    for i in 1..nodes.len() {
        let ivs = episode.intervals().get(i - 1).map(|iv| vec![*iv]).unwrap_or_default();
        pairs.push(Episode::serial(vec![nodes[i - 1], nodes[i]], ivs)?);
    }
    let counts = count_serial_all(&pairs, seq, false)?;
    Ok(pairs
        .iter()
        .zip(counts)
        .map(|(p, (c, _))| {
            let base = hist.get(p.nodes()[0].index()).copied().unwrap_or(0);
            (base > 0).then(|| c as f64 / base as f64)
        })
        .collect())
}
