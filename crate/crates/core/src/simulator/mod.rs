//! Spike-train generator: a network of inhomogeneous Poisson neurons whose
//! rates follow a sigmoid of their delayed, weighted synaptic input.
//!
//! Time is split into bins of width `dt`. In bin `i` neuron `j` fires as a
//! Poisson process with rate
//!
//! ```text
//! lambda_j(i) = lambda_m / (1 + exp(-delta_lambda * I_j(i) + d_j))
//! I_j(i)      = sum_k w_kj * O_k(i - delay_kj)
//! ```
//!
//! where `O_k(i)` is the number of spikes neuron `k` emitted in bin `i`.
//! Arrivals that fall inside a neuron's refractory period are dropped before
//! they are recorded or propagated.

mod network;
mod null;

pub use network::{
    build_network, embed_pattern, neuron_labels, preset_duration, preset_patterns, ConnectionScheme, NetworkModel, PatternKind,
    PatternSpec, Synapse, PRESET_NAMES,
};
pub use null::{generate_null_dataset, null_rate_schedule, NullKind, NullParams};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{Alphabet, Event, EventSequence, EventType};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimParams {
    pub n_neurons: usize,
    /// Bin width in seconds.
    pub dt: f64,
    /// Simulated time in seconds.
    pub duration: f64,
    /// Zero-input firing rate (Hz).
    pub lambda_normal: f64,
    /// Probability that a neuron fires within one bin at the saturating rate.
    pub e_strong: f64,
    /// Fraction of the saturating rate reached after one strong input spike.
    pub beta: f64,
    /// Sigmoid slope.
    pub delta_lambda: f64,
    pub t_refractory: f64,
    /// Scales the background rate of pattern members.
    pub alpha_adjust: f64,
    /// Random weights are drawn from `[-c, c]`.
    pub c: f64,
    /// Default synaptic delay in bins.
    pub synaptic_delay: u32,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            n_neurons: 26,
            dt: 0.001,
            duration: 50.0,
            lambda_normal: 20.0,
            e_strong: 0.95,
            beta: 0.9,
            delta_lambda: 1.0,
            t_refractory: 0.001,
            alpha_adjust: 1.5,
            c: 0.5,
            synaptic_delay: 5,
            seed: 0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_neurons == 0 {
            return domain("need at least one neuron");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return domain(format!("duration must be non-negative, got {}", self.duration));
        }
        if !(self.e_strong > 0.0 && self.e_strong < 1.0) {
            return domain(format!("e_strong must lie in (0,1), got {}", self.e_strong));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return domain(format!("beta must lie in (0,1), got {}", self.beta));
        }
        if !(self.lambda_normal > 0.0) {
            return domain(format!("lambda_normal must be positive, got {}", self.lambda_normal));
        }
        if !(self.delta_lambda > 0.0) {
            return domain(format!("delta_lambda must be positive, got {}", self.delta_lambda));
        }
        if !(self.t_refractory >= 0.0) || !(self.c >= 0.0) || !(self.alpha_adjust >= 0.0) {
            return domain("t_refractory, c and alpha_adjust must be non-negative");
        }
        if self.synaptic_delay == 0 {
            return domain("synaptic delay must be at least one bin");
        }
        Ok(())
    }

    pub fn lambda_m(&self) -> Result<f64> {
        lambda_m(self.e_strong, self.dt)
    }

    pub fn w_strong(&self) -> Result<f64> {
        w_strong(self.beta, self.lambda_m()?, self.lambda_normal, self.delta_lambda)
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Rate at which a Poisson neuron fires within `dt` with probability `e_strong`.
pub fn lambda_m(e_strong: f64, dt: f64) -> Result<f64> {
    if !(e_strong > 0.0 && e_strong < 1.0) {
        return domain(format!("e_strong must lie in (0,1), got {e_strong}"));
    }
    if !(dt > 0.0) {
        return domain(format!("dt must be positive, got {dt}"));
    }
    Ok(-(1.0 - e_strong).ln() / dt)
}

/// Sigmoid displacement giving rate `lambda_normal` at zero input.
pub fn displacement_d(lambda_m: f64, lambda_normal: f64) -> Result<f64> {
    if !(lambda_normal > 0.0) || !(lambda_m / lambda_normal > 1.0) {
        return domain(format!(
            "need lambda_m > lambda_normal > 0, got {lambda_m} and {lambda_normal}"
        ));
    }
    Ok((lambda_m / lambda_normal - 1.0).ln())
}

/// Weight of a single input that lifts the rate to `beta * lambda_m`.
pub fn w_strong(beta: f64, lambda_m: f64, lambda_normal: f64, delta_lambda: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("beta must lie in (0,1), got {beta}"));
    }
    if !(delta_lambda > 0.0) {
        return domain("delta_lambda must be positive");
    }
    displacement_d(lambda_m, lambda_normal)?;
    Ok((beta / (1.0 - beta) * (lambda_m / lambda_normal - 1.0)).ln() / delta_lambda)
}

pub fn firing_rate(lambda_m: f64, delta_lambda: f64, input: f64, d: f64) -> f64 {
    lambda_m / (1.0 + (-delta_lambda * input + d).exp())
}

/// Background rate of neurons that take part in an embedded pattern.
pub fn adjusted_rate(params: &SimParams) -> f64 {
    params.alpha_adjust * params.lambda_normal * (1.0 - params.e_strong)
}

/// Runs the network for `params.duration` seconds.
pub fn simulate(network: &NetworkModel, params: &SimParams) -> Result<EventSequence> {
    params.validate()?;
    if network.n_neurons() != params.n_neurons {
        return domain(format!(
            "network has {} neurons, parameters say {}",
            network.n_neurons(),
            params.n_neurons
        ));
    }
    let lm = params.lambda_m()?;
    let n = network.n_neurons();
    let mut incoming: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); n];
    let mut max_delay = 0;
    for s in network.synapses() {
        if s.weight != 0.0 {
            incoming[s.post].push((s.pre, s.weight, s.delay as usize));
            max_delay = max_delay.max(s.delay as usize);
        }
    }
    let d = network.base_d();
    let dl = params.delta_lambda;
    let spikes = run_bins(n, params, max_delay, |_, j, history| {
        let input: f64 = incoming[j]
            .iter()
            .map(|&(pre, w, delay)| w * history.count(pre, delay) as f64)
            .sum();
        firing_rate(lm, dl, input, d[j])
    });
    to_sequence(network.labels(), spikes)
}

/// Spike counts for the last few bins, indexed by how many bins back.
pub(crate) struct History {
    counts: Vec<Vec<u32>>,
    current: usize,
}

impl History {
    fn new(n: usize, depth: usize) -> Self {
        History {
            counts: vec![vec![0; n]; depth + 1],
            current: 0,
        }
    }

    /// Spikes of `neuron` emitted `back` bins before the current one.
    pub(crate) fn count(&self, neuron: usize, back: usize) -> u32 {
        let len = self.counts.len();
        if back >= len {
            return 0;
        }
        self.counts[(self.current + len - back) % len][neuron]
    }

    fn advance(&mut self) {
        self.current = (self.current + 1) % self.counts.len();
        self.counts[self.current].iter_mut().for_each(|c| *c = 0);
    }
}

/// Per-neuron random stream, independent of the number of neurons.
pub(crate) fn neuron_rng(seed: u64, neuron: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(neuron as u64);
    rng
}

/// Stream reserved for drawing network structure and other setup values.
pub fn setup_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

const NS: f64 = 1e9;

/// Shared bin loop: draws exponential arrivals at `rate(bin, neuron, history)`
/// and applies the refractory filter. Returns `(neuron, time_ns)` in bin
/// order, neurons in index order within a bin.
pub(crate) fn run_bins<F>(n: usize, params: &SimParams, depth: usize, mut rate: F) -> Vec<(usize, u64)>
where
    F: FnMut(usize, usize, &History) -> f64,
{
    let steps = params.steps();
    let end_ns = (params.duration * NS).round() as u64;
    let tref_ns = (params.t_refractory * NS).round() as u64;
    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|j| neuron_rng(params.seed, j)).collect();
    let mut last: Vec<Option<u64>> = vec![None; n];
    let mut history = History::new(n, depth);
    let mut out = Vec::new();
    for i in 0..steps {
        // the bin being filled sits at back = 0; inputs look at back >= 1
        history.advance();
        let start = i as f64 * params.dt;
        let stop = ((i + 1) as f64 * params.dt).min(params.duration);
        for j in 0..n {
            let lambda = rate(i, j, &history);
            if !(lambda > 0.0) {
                continue;
            }
            let rng = &mut rngs[j];
            let mut t = start;
            let mut fired = 0;
            loop {
                let gap: f64 = rng.sample(Exp1);
                t += gap / lambda;
                if t >= stop {
                    break;
                }
                let t_ns = (t * NS).round() as u64;
                if t_ns >= end_ns {
                    break;
                }
                if last[j].is_some_and(|l| t_ns - l < tref_ns) {
                    continue;
                }
                last[j] = Some(t_ns);
                out.push((j, t_ns));
                fired += 1;
            }
            history.counts[history.current][j] = fired;
        }
    }
    out
}

pub(crate) fn to_sequence(labels: &[String], spikes: Vec<(usize, u64)>) -> Result<EventSequence> {
    let alphabet = Alphabet::from_labels(labels.iter().cloned())?;
    let events = spikes
        .into_iter()
        .map(|(j, t_ns)| Event {
            etype: EventType(j as u32),
            time: t_ns as f64 / NS,
        })
        .collect();
    EventSequence::new(alphabet, events)
}
