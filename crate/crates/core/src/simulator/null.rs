//! Surrogate data without embedded structure.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{build_network, run_bins, setup_rng, simulate, to_sequence, ConnectionScheme, SimParams};
use super::network::neuron_labels;
use crate::error::{domain, Error, Result};
use crate::model::EventSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullKind {
    /// Simulator with random weights only.
    RandomNetwork,
    /// Independent Poisson neurons, one fixed random rate each.
    FixedRates,
    /// Fixed rates shared within randomly assigned groups.
    GroupedFixedRates,
    /// Independent rates re-drawn every `block` bins.
    VaryingRates,
    /// Re-drawn rates shared within randomly assigned groups.
    GroupedVaryingRates,
}

impl NullKind {
    pub const ALL: [NullKind; 5] = [
        NullKind::RandomNetwork,
        NullKind::FixedRates,
        NullKind::GroupedFixedRates,
        NullKind::VaryingRates,
        NullKind::GroupedVaryingRates,
    ];
}

impl FromStr for NullKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-network" => Ok(NullKind::RandomNetwork),
            "fixed-rates" => Ok(NullKind::FixedRates),
            "grouped-fixed-rates" => Ok(NullKind::GroupedFixedRates),
            "varying-rates" => Ok(NullKind::VaryingRates),
            "grouped-varying-rates" => Ok(NullKind::GroupedVaryingRates),
            other => domain(format!("unknown null model {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NullParams {
    /// Random rates are uniform in `[rate_low, rate_high]` Hz.
    pub rate_low: f64,
    pub rate_high: f64,
    pub groups: usize,
    /// Bins between rate changes for the varying kinds.
    pub block: usize,
    pub scheme: ConnectionScheme,
}

impl Default for NullParams {
    fn default() -> Self {
        NullParams {
            rate_low: 10.0,
            rate_high: 30.0,
            groups: 5,
            block: 50,
            scheme: ConnectionScheme::BernoulliPairs,
        }
    }
}

/// One surrogate dataset. Everything random is derived from `params.seed`.
pub fn generate_null_dataset(kind: NullKind, params: &SimParams, null: &NullParams) -> Result<EventSequence> {
    params.validate()?;
    if !(null.rate_low >= 0.0 && null.rate_low <= null.rate_high) {
        return domain(format!("bad rate range [{}, {}]", null.rate_low, null.rate_high));
    }
    if null.groups == 0 || null.block == 0 {
        return domain("groups and block must be positive");
    }
    let n = params.n_neurons;
    if kind == NullKind::RandomNetwork {
        let net = build_network(params, null.scheme, &mut setup_rng(params.seed))?;
        return simulate(&net, params);
    }
    let (group_of, rates) = null_rate_schedule(kind, params, null)?;
    let varying = rates.len() > 1;
    let block = null.block;
    let spikes = run_bins(n, params, 0, |i, j, _| {
        let b = if varying { i / block } else { 0 };
        rates[b][group_of[j]]
    });
    to_sequence(&neuron_labels(n), spikes)
}

/// Rate schedule used by a rate-based null dataset, for inspection:
/// `(group_of_neuron, rates[block][slot])`.
pub fn null_rate_schedule(
    kind: NullKind,
    params: &SimParams,
    null: &NullParams,
) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    if kind == NullKind::RandomNetwork {
        return domain("random-network nulls have no fixed rate schedule");
    }
    let n = params.n_neurons;
    let mut rng = setup_rng(params.seed);
    let grouped = matches!(kind, NullKind::GroupedFixedRates | NullKind::GroupedVaryingRates);
    let varying = matches!(kind, NullKind::VaryingRates | NullKind::GroupedVaryingRates);
    let slots = if grouped { null.groups } else { n };
    let group_of: Vec<usize> = (0..n)
        .map(|j| if grouped { rng.random_range(0..slots) } else { j })
        .collect();
    let blocks = if varying { params.steps().div_ceil(null.block).max(1) } else { 1 };
    let rates = (0..blocks)
        .map(|_| (0..slots).map(|_| rng.random_range(null.rate_low..=null.rate_high)).collect())
        .collect();
    Ok((group_of, rates))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64, duration: f64) -> SimParams {
        SimParams {
            duration,
            seed,
            ..SimParams::default()
        }
    }

    #[test]
    fn single_group_shares_rate() {
        let null = NullParams {
            groups: 1,
            ..NullParams::default()
        };
        let (group_of, rates) = null_rate_schedule(NullKind::GroupedFixedRates, &params(1, 1.0), &null).unwrap();
        assert!(group_of.iter().all(|&g| g == 0));
        assert_eq!(rates.len(), 1);
        assert_eq!(rates[0].len(), 1);
    }

    #[test]
    fn varying_blocks() {
        let (group_of, rates) =
            null_rate_schedule(NullKind::VaryingRates, &params(2, 1.0), &NullParams::default()).unwrap();
        assert_eq!(group_of, (0..26).collect::<Vec<_>>());
        // 1000 bins in blocks of 50
        assert_eq!(rates.len(), 20);
        assert!(rates.iter().flatten().all(|r| (10.0..=30.0).contains(r)));
    }

    #[test]
    fn deterministic_and_labeled() {
        for kind in NullKind::ALL {
            let a = generate_null_dataset(kind, &params(5, 2.0), &NullParams::default()).unwrap();
            let b = generate_null_dataset(kind, &params(5, 2.0), &NullParams::default()).unwrap();
            assert_eq!(a, b);
            assert!(a.len() > 200, "{kind:?}: {}", a.len());
        }
    }

    #[test]
    fn kind_names() {
        assert_eq!("fixed-rates".parse::<NullKind>().unwrap(), NullKind::FixedRates);
        assert!("bursty".parse::<NullKind>().is_err());
    }
}
