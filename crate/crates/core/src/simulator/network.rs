use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{adjusted_rate, displacement_d, SimParams};
use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Synapse {
    pub pre: usize,
    pub post: usize,
    pub weight: f64,
    /// Delay in bins.
    pub delay: u32,
}

/// Neurons, synapses and per-neuron sigmoid displacement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    labels: Vec<String>,
    synapses: Vec<Synapse>,
    base_d: Vec<f64>,
}

impl NetworkModel {
    /// Unconnected network where every neuron fires at `lambda_normal`.
    pub fn unconnected(params: &SimParams) -> Result<Self> {
        params.validate()?;
        let d = displacement_d(params.lambda_m()?, params.lambda_normal)?;
        Ok(NetworkModel {
            labels: neuron_labels(params.n_neurons),
            synapses: Vec::new(),
            base_d: vec![d; params.n_neurons],
        })
    }

    pub fn n_neurons(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    pub fn base_d(&self) -> &[f64] {
        &self.base_d
    }

    pub fn neuron(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    /// Sets the weight and delay of `pre -> post`, adding the synapse if absent.
    pub fn set_synapse(&mut self, pre: usize, post: usize, weight: f64, delay: u32) {
        match self.synapses.iter_mut().find(|s| s.pre == pre && s.post == post) {
            Some(s) => {
                s.weight = weight;
                s.delay = delay;
            }
            None => self.synapses.push(Synapse { pre, post, weight, delay }),
        }
    }

    pub fn set_base_d(&mut self, neuron: usize, d: f64) {
        self.base_d[neuron] = d;
    }
}

/// "A".."Z" for up to 26 neurons, "n0".."n{N-1}" beyond that.
pub fn neuron_labels(n: usize) -> Vec<String> {
    if n <= 26 {
        (0..n).map(|i| char::from(b'A' + i as u8).to_string()).collect()
    } else {
        (0..n).map(|i| format!("n{i}")).collect()
    }
}

/// Random background connectivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConnectionScheme {
    /// Each neuron feeds `k` distinct others, `k` uniform in `0..N-1`.
    RandomFanout,
    /// Each ordered pair is connected with probability 1/2.
    BernoulliPairs,
    Full,
    /// No background synapses.
    None,
}

impl FromStr for ConnectionScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-fanout" => Ok(ConnectionScheme::RandomFanout),
            "bernoulli-pairs" => Ok(ConnectionScheme::BernoulliPairs),
            "full" => Ok(ConnectionScheme::Full),
            "none" => Ok(ConnectionScheme::None),
            other => domain(format!("unknown connection scheme {other:?}")),
        }
    }
}

/// Random network with weights uniform in `[-c, c]` and the default delay.
pub fn build_network<R: Rng + ?Sized>(
    params: &SimParams,
    scheme: ConnectionScheme,
    rng: &mut R,
) -> Result<NetworkModel> {
    let mut net = NetworkModel::unconnected(params)?;
    let n = params.n_neurons;
    let c = params.c;
    let weight = |rng: &mut R| if c == 0.0 { 0.0 } else { rng.random_range(-c..=c) };
    let mut pairs = Vec::new();
    match scheme {
        ConnectionScheme::None => {}
        ConnectionScheme::Full => {
            for pre in 0..n {
                for post in (0..n).filter(|&p| p != pre) {
                    pairs.push((pre, post));
                }
            }
        }
        ConnectionScheme::BernoulliPairs => {
            for pre in 0..n {
                for post in (0..n).filter(|&p| p != pre) {
                    if rng.random_bool(0.5) {
                        pairs.push((pre, post));
                    }
                }
            }
        }
        ConnectionScheme::RandomFanout => {
            for pre in 0..n {
                let k = rng.random_range(0..n);
                for idx in sample(rng, n - 1, k).into_iter() {
                    // skip over `pre` itself
                    let post = if idx >= pre { idx + 1 } else { idx };
                    pairs.push((pre, post));
                }
            }
        }
    }
    for (pre, post) in pairs {
        let w = weight(rng);
        net.synapses.push(Synapse {
            pre,
            post,
            weight: w,
            delay: params.synaptic_delay,
        });
    }
    Ok(net)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    /// One head driving a group that then fires together.
    Synchrony,
    /// A chain of single neurons.
    Order,
    /// Alternating groups; a group converging on the next splits the strong
    /// weight among its members.
    Synfire,
}

/// Strongly connected structure to embed. Consecutive groups are fully
/// connected from the earlier to the later one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub groups: Vec<Vec<String>>,
    /// Delay in bins for each pair of consecutive groups. Empty means the
    /// default synaptic delay everywhere.
    #[serde(default)]
    pub delays: Vec<u32>,
}

impl PatternSpec {
    pub fn validate(&self) -> Result<()> {
        for g in &self.groups {
            if g.is_empty() {
                return domain("pattern groups must be nonempty");
            }
            let distinct: HashSet<&String> = g.iter().collect();
            if distinct.len() != g.len() {
                return domain(format!("repeated neuron in pattern group {g:?}"));
            }
        }
        if !self.delays.is_empty() && self.delays.len() + 1 != self.groups.len() {
            return domain(format!(
                "{} delays given for {} pattern groups",
                self.delays.len(),
                self.groups.len()
            ));
        }
        if self.delays.contains(&0) {
            return domain("pattern delays must be at least one bin");
        }
        match self.kind {
            PatternKind::Order if self.groups.iter().any(|g| g.len() != 1) => {
                domain("order patterns take single-neuron groups")
            }
            PatternKind::Synchrony if self.groups.len() > 2 || self.groups.first().is_some_and(|g| g.len() != 1) => {
                domain("synchrony patterns are one head followed by one group")
            }
            _ => Ok(()),
        }
    }

    /// Neurons in the first group.
    pub fn heads(&self) -> &[String] {
        self.groups.first().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Neurons driven by the pattern.
    pub fn members(&self) -> impl Iterator<Item = &String> {
        self.groups.iter().skip(1).flatten()
    }

    pub fn from_json(text: &str) -> Result<Vec<PatternSpec>> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            One(PatternSpec),
            Many(Vec<PatternSpec>),
        }
        let specs = match serde_json::from_str(text)? {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        };
        for s in &specs {
            s.validate()?;
        }
        Ok(specs)
    }
}

/// Strengthens the synapses of `spec` and lowers the background rate of
/// every driven neuron so spike counts stay roughly flat.
///
/// One spike from a single source, or one from every member of a source
/// group, raises the receiver's rate to `beta * lambda_m`.
pub fn embed_pattern(network: &NetworkModel, spec: &PatternSpec, params: &SimParams) -> Result<NetworkModel> {
    spec.validate()?;
    let mut net = network.clone();
    let ids: Vec<Vec<usize>> = spec
        .groups
        .iter()
        .map(|g| g.iter().map(|l| net.neuron(l)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let d_adj = displacement_d(params.lambda_m()?, adjusted_rate(params))?;
    for group in ids.iter().skip(1) {
        for &j in group {
            net.set_base_d(j, d_adj);
        }
    }
    // the strong weight is relative to the receiver's own displacement, so
    // a full set of inputs lifts it to beta * lambda_m whatever its
    // background rate
    let logit_beta = (params.beta / (1.0 - params.beta)).ln();
    for (k, pair) in ids.windows(2).enumerate() {
        let delay = spec.delays.get(k).copied().unwrap_or(params.synaptic_delay);
        for &post in &pair[1] {
            let w = (logit_beta + net.base_d[post]) / params.delta_lambda;
            let share = w / pair[0].len() as f64;
            for &pre in &pair[0] {
                net.set_synapse(pre, post, share, delay);
            }
        }
    }
    Ok(net)
}

/// Built-in pattern sets by name.
pub const PRESET_NAMES: [&str; 8] = [
    "synchrony",
    "order",
    "synfire",
    "example1",
    "example2",
    "example3",
    "significance",
    "significance-serial",
];

/// Recording length matched to the reported group frequencies of a preset,
/// where it differs from the default.
pub fn preset_duration(name: &str) -> Option<f64> {
    match name {
        "example2" => Some(19.0),
        "example3" => Some(38.0),
        _ => None,
    }
}

pub fn preset_patterns(name: &str) -> Option<Vec<PatternSpec>> {
    fn g(groups: &[&[&str]]) -> Vec<Vec<String>> {
        groups.iter().map(|g| g.iter().map(|s| s.to_string()).collect()).collect()
    }
    let spec = |kind, groups: &[&[&str]], delays: &[u32]| PatternSpec {
        kind,
        groups: g(groups),
        delays: delays.to_vec(),
    };
    let specs = match name {
        "synchrony" => vec![spec(PatternKind::Synchrony, &[&["A"], &["B", "C", "D"]], &[])],
        "order" => vec![spec(PatternKind::Order, &[&["A"], &["B"], &["C"], &["D"]], &[])],
        "synfire" | "example2" => vec![spec(
            PatternKind::Synfire,
            &[&["A"], &["B", "C", "D"], &["E"], &["F", "G", "H", "I"], &["J"], &["K", "L"]],
            &[],
        )],
        "example1" => vec![
            spec(PatternKind::Order, &[&["A"], &["B"], &["C"], &["D"]], &[]),
            spec(PatternKind::Order, &[&["B"], &["E"], &["F"]], &[]),
        ],
        "example3" => vec![spec(
            PatternKind::Synfire,
            &[&["X"], &["A", "B", "C"], &["D"], &["E"], &["F"]],
            &[5, 3, 7, 3],
        )],
        "significance" => vec![spec(
            PatternKind::Synchrony,
            &[&["A"], &["B", "C", "D", "E", "F", "G", "H", "I", "J", "K"]],
            &[],
        )],
        "significance-serial" => vec![spec(
            PatternKind::Order,
            &[&["A"], &["B"], &["C"], &["D"], &["E"], &["F"], &["G"], &["H"], &["I"], &["J"]],
            &[],
        )],
        _ => return None,
    };
    Some(specs)
}
