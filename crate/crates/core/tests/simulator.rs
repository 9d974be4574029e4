use epimine::simulator::*;
use epimine::EventSequence;

fn per_neuron_times(seq: &EventSequence) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); seq.alphabet().len()];
    for e in seq.events() {
        out[e.etype.index()].push(e.time);
    }
    out
}

fn unconnected(params: &SimParams) -> EventSequence {
    let net = build_network(params, ConnectionScheme::None, &mut setup_rng(params.seed)).unwrap();
    simulate(&net, params).unwrap()
}

#[test]
fn zero_input_rate() {
    let p = SimParams {
        seed: 3,
        ..SimParams::default()
    };
    let seq = unconnected(&p);
    let rate = p.lambda_normal / (1.0 + p.lambda_normal * p.t_refractory);
    let expected = rate * p.duration * p.n_neurons as f64;
    assert!(expected > 1e4);
    let sigma = expected.sqrt();
    let n = seq.len() as f64;
    assert!((n - expected).abs() < 3.0 * sigma, "{n} vs {expected}");
    for times in per_neuron_times(&seq) {
        let e = rate * p.duration;
        assert!((times.len() as f64 - e).abs() < 5.0 * e.sqrt());
    }
}

#[test]
fn zero_weights_match_unconnected() {
    let p = SimParams {
        c: 0.0,
        duration: 3.0,
        seed: 8,
        ..SimParams::default()
    };
    let full = build_network(&p, ConnectionScheme::Full, &mut setup_rng(p.seed)).unwrap();
    assert!(full.synapses().iter().all(|s| s.weight == 0.0));
    assert_eq!(simulate(&full, &p).unwrap(), unconnected(&p));
}

#[test]
fn refractory_exact_at_high_rate() {
    let p = SimParams {
        lambda_normal: 400.0,
        duration: 20.0,
        seed: 5,
        ..SimParams::default()
    };
    let seq = unconnected(&p);
    assert!(seq.len() > 100_000);
    for times in per_neuron_times(&seq) {
        for w in times.windows(2) {
            assert!(w[1] - w[0] >= p.t_refractory - 1e-12, "{} {}", w[0], w[1]);
        }
    }
}

#[test]
fn deterministic_and_substreams() {
    let p = SimParams {
        duration: 5.0,
        seed: 11,
        ..SimParams::default()
    };
    let net = build_network(&p, ConnectionScheme::BernoulliPairs, &mut setup_rng(p.seed)).unwrap();
    assert_eq!(simulate(&net, &p).unwrap(), simulate(&net, &p).unwrap());

    // without synapses a neuron's train does not depend on how many others exist
    let small = SimParams { n_neurons: 5, ..p.clone() };
    let a = per_neuron_times(&unconnected(&small));
    let b = per_neuron_times(&unconnected(&p));
    assert_eq!(a[..5], b[..5]);
    let other = SimParams { seed: 12, ..p.clone() };
    assert_ne!(unconnected(&other), unconnected(&p));
}

#[test]
fn bernoulli_pair_count() {
    let p = SimParams::default();
    let mut rng = setup_rng(99);
    let trials = 1000;
    let total: usize = (0..trials)
        .map(|_| build_network(&p, ConnectionScheme::BernoulliPairs, &mut rng).unwrap().synapses().len())
        .sum();
    let mean = total as f64 / trials as f64;
    let sigma = (650.0f64 * 0.25).sqrt() / (trials as f64).sqrt();
    assert!((mean - 325.0).abs() < 3.0 * sigma, "{mean}");
    let full = build_network(&SimParams { n_neurons: 3, ..p.clone() }, ConnectionScheme::Full, &mut rng).unwrap();
    assert_eq!(full.synapses().len(), 6);
}

#[test]
fn fixed_rate_nulls_follow_schedule() {
    let p = SimParams {
        seed: 4,
        ..SimParams::default()
    };
    let null = NullParams::default();
    let seq = generate_null_dataset(NullKind::FixedRates, &p, &null).unwrap();
    let (group_of, rates) = null_rate_schedule(NullKind::FixedRates, &p, &null).unwrap();
    for (j, times) in per_neuron_times(&seq).iter().enumerate() {
        let r = rates[0][group_of[j]];
        let expected = r / (1.0 + r * p.t_refractory);
        let got = times.len() as f64 / p.duration;
        assert!((got - expected).abs() <= 0.1 * expected, "neuron {j}: {got} vs {expected}");
    }
}

#[test]
fn varying_rates_change_on_block_edges() {
    let p = SimParams {
        duration: 2.0,
        seed: 6,
        ..SimParams::default()
    };
    let null = NullParams::default();
    let (_, rates) = null_rate_schedule(NullKind::GroupedVaryingRates, &p, &null).unwrap();
    assert_eq!(rates.len(), 40);
    assert!(rates.windows(2).any(|w| w[0] != w[1]));
}

#[test]
fn defining_identities() {
    for k in 1..=99 {
        let e = k as f64 / 100.0;
        let lm = lambda_m(e, 0.001).unwrap();
        assert!((1.0 - (-lm * 0.001).exp() - e).abs() < 1e-12);
    }
    let p = SimParams::default();
    let lm = p.lambda_m().unwrap();
    let d = displacement_d(lm, p.lambda_normal).unwrap();
    let w = p.w_strong().unwrap();
    assert!((firing_rate(lm, 1.0, 0.0, d) - 20.0).abs() < 1e-9);
    assert!((firing_rate(lm, 1.0, w, d) - 0.9 * lm).abs() < 1e-9);
    assert!((w_strong(0.5, lm, 20.0, 1.0).unwrap() - d).abs() < 1e-12);
    assert!((adjusted_rate(&p) - 1.5).abs() < 1e-12);
}

#[test]
fn embedded_network_sidecar_round_trip() {
    let p = SimParams::default();
    let mut net = build_network(&p, ConnectionScheme::BernoulliPairs, &mut setup_rng(1)).unwrap();
    for s in preset_patterns("example3").unwrap() {
        net = embed_pattern(&net, &s, &p).unwrap();
    }
    let text = serde_json::to_string(&net).unwrap();
    let back: NetworkModel = serde_json::from_str(&text).unwrap();
    assert_eq!(back, net);
    let x = net.neuron("X").unwrap();
    let a = net.neuron("A").unwrap();
    let s = net.synapses().iter().find(|s| s.pre == x && s.post == a).unwrap();
    assert_eq!(s.delay, 5);
}
