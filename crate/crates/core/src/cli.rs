//! Command-line front end.
//!
//! Every verb resolves its settings (config file first, then flags) into one
//! JSON document that is written next to the outputs as `config.json`.
//! Passing that file back with `--config` reruns the same computation.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{MiningOutput, SynfireOutput};
use crate::model::{EventSequence, FrequentEpisodeResult, IntervalConstraint, MiningConfig};
use crate::parallel::mine_parallel;
use crate::serial::mine_serial;
use crate::significance::{
    calibrate_threshold, null_ensemble_stats, p_value, pattern_ensemble_stats, EnsembleMining, FrequencyStats,
    PValue,
};
use crate::similarity::{cross_similarity, matrix_csv, EpisodeSet};
use crate::simulator::{
    build_network, embed_pattern, preset_duration, preset_patterns, setup_rng, simulate, ConnectionScheme,
    NullKind, NullParams, PatternSpec, SimParams, PRESET_NAMES,
};
use crate::synfire::mine_synfire;

const CONFIG_SCHEMA: &str = "epimine-config/1";

#[derive(Parser, Debug)]
#[command(name = "epimine", version, about = "Frequent episode discovery in event sequences")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a spiking network, optionally with embedded patterns.
    Simulate(SimulateArgs),
    /// Mine frequent parallel episodes under an expiry time.
    MineParallel(ParallelArgs),
    /// Mine frequent serial episodes with inter-event intervals.
    MineSerial(SerialArgs),
    /// Collapse synchronous groups into composite events, then mine chains.
    MineSynfire(SynfireArgs),
    /// Frequency statistics over null and patterned dataset ensembles.
    Significance(SignificanceArgs),
    /// Cross-similarity matrix of episode sets.
    Similarity(SimilarityArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Resolved config from an earlier run; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug, Default)]
struct SimFlags {
    #[arg(long)]
    neurons: Option<usize>,
    #[arg(long, value_parser = positive)]
    duration: Option<f64>,
    #[arg(long, value_parser = positive)]
    dt: Option<f64>,
    #[arg(long, value_parser = positive)]
    lambda_normal: Option<f64>,
    #[arg(long)]
    e_strong: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_parser = positive)]
    delta_lambda: Option<f64>,
    #[arg(long)]
    refractory: Option<f64>,
    #[arg(long)]
    alpha_adjust: Option<f64>,
    /// Random weights are drawn from [-c, c].
    #[arg(long)]
    c: Option<f64>,
    /// Synaptic delay in bins.
    #[arg(long)]
    delay: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SimFlags {
    fn apply(&self, p: &mut SimParams) {
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { p.$field = v; })*
            };
        }
        set!(neurons => n_neurons, duration => duration, dt => dt, lambda_normal => lambda_normal,
             e_strong => e_strong, beta => beta, delta_lambda => delta_lambda, refractory => t_refractory,
             alpha_adjust => alpha_adjust, c => c, delay => synaptic_delay, seed => seed);
    }
}

#[derive(Args, Debug)]
struct ThresholdFlags {
    /// Frequency threshold as a fraction of the number of events.
    #[arg(long, conflicts_with = "min_count", value_parser = fraction)]
    threshold: Option<f64>,
    /// Absolute count threshold.
    #[arg(long)]
    min_count: Option<u64>,
    /// Largest episode size to mine.
    #[arg(long)]
    max_size: Option<usize>,
    /// Cap on candidates per level.
    #[arg(long)]
    budget: Option<usize>,
}

impl ThresholdFlags {
    fn apply(&self, cfg: &mut MiningConfig) {
        if let Some(t) = self.threshold {
            cfg.threshold_fraction = t;
            cfg.min_count = None;
        }
        if let Some(m) = self.min_count {
            cfg.min_count = Some(m);
        }
        if let Some(k) = self.max_size {
            cfg.max_size = k;
        }
        if let Some(b) = self.budget {
            cfg.candidate_budget = Some(b);
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: SimFlags,
    /// Named pattern preset; also sets the matching duration where one is defined.
    #[arg(long)]
    preset: Option<String>,
    /// Pattern JSON file or preset name (repeatable).
    #[arg(long)]
    pattern: Vec<String>,
    /// Background connectivity: random-fanout, bernoulli-pairs, full or none.
    #[arg(long)]
    scheme: Option<ConnectionScheme>,
}

#[derive(Args, Debug)]
struct ParallelArgs {
    /// Events CSV (label,time).
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    /// Expiry time in seconds.
    #[arg(long, allow_hyphen_values = true, value_parser = positive)]
    expiry: Option<f64>,
    #[command(flatten)]
    thresholds: ThresholdFlags,
    /// Also write occurrence overlays for raster plots.
    #[arg(long)]
    raster: bool,
}

#[derive(Args, Debug)]
struct SerialArgs {
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    /// Candidate inter-event interval "low:high" in seconds (repeatable).
    #[arg(long = "intervals", value_parser = interval)]
    intervals: Vec<IntervalConstraint>,
    #[command(flatten)]
    thresholds: ThresholdFlags,
    #[arg(long)]
    raster: bool,
    /// Write per-edge confidence ratios of the largest episodes.
    #[arg(long)]
    confidence: bool,
}

#[derive(Args, Debug)]
struct SynfireArgs {
    input: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    /// Expiry time of the synchrony phase.
    #[arg(long, allow_hyphen_values = true, value_parser = positive)]
    expiry: Option<f64>,
    #[arg(long = "intervals", value_parser = interval)]
    intervals: Vec<IntervalConstraint>,
    #[command(flatten)]
    thresholds: ThresholdFlags,
    #[arg(long)]
    raster: bool,
}

#[derive(Args, Debug)]
struct SignificanceArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: SimFlags,
    /// "parallel" or "serial".
    #[arg(long)]
    episodes: Option<String>,
    /// "interval-discovery" runs serial mining over three interval bins on rate-based nulls.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, allow_hyphen_values = true, value_parser = positive)]
    expiry: Option<f64>,
    #[arg(long = "intervals", value_parser = interval)]
    intervals: Vec<IntervalConstraint>,
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    /// Number of null datasets.
    #[arg(long)]
    nulls: Option<usize>,
    /// Number of datasets with the pattern embedded (0 skips them).
    #[arg(long)]
    pattern_datasets: Option<usize>,
    /// Comma-separated null kinds.
    #[arg(long, value_delimiter = ',')]
    null_kinds: Vec<NullKind>,
    /// Pattern JSON file or preset name used for the patterned ensemble.
    #[arg(long)]
    pattern: Option<String>,
    #[arg(long)]
    safety_factor: Option<f64>,
    /// "size:count" pairs to compute surrogate p-values for (repeatable).
    #[arg(long, value_parser = observed)]
    observed: Vec<(usize, u64)>,
}

#[derive(Args, Debug)]
struct SimilarityArgs {
    /// JSON manifest: a list of {"label", "path"} entries.
    manifest: PathBuf,
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
    /// Episode size to take from mining results (defaults to the largest).
    #[arg(long)]
    size: Option<usize>,
    /// Keep only the most frequent episodes of each result file.
    #[arg(long)]
    top: Option<usize>,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be a positive number, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn fraction(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        Ok(v) => Err(format!("must lie in [0, 1], got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn interval(s: &str) -> std::result::Result<IntervalConstraint, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected low:high, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    IntervalConstraint::new(lo, hi).map_err(|e| e.to_string())
}

fn observed(s: &str) -> std::result::Result<(usize, u64), String> {
    let (k, c) = s.split_once(':').ok_or_else(|| format!("expected size:count, got {s:?}"))?;
    Ok((k.parse().map_err(|e| format!("{e}"))?, c.parse().map_err(|e| format!("{e}"))?))
}

/// Raised for bad combinations of otherwise well-formed flags.
struct Usage(String);

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.jobs {
        Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Failure::Runtime(Error::Domain(e.to_string()))),
        },
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a),
        Command::MineParallel(a) => cmd_parallel(a),
        Command::MineSerial(a) => cmd_serial(a),
        Command::MineSynfire(a) => cmd_synfire(a),
        Command::Significance(a) => cmd_significance(a),
        Command::Similarity(a) => cmd_similarity(a),
    }
}

fn load_config<T: DeserializeOwned>(path: &Option<PathBuf>, verb: &str) -> CliResult<Option<T>> {
    let Some(path) = path else {
        return Ok(None);
    };
    let text = fs::read_to_string(path).map_err(Error::from)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
    if let Some(v) = value.get("verb").and_then(|v| v.as_str()) {
        if v != verb {
            return Err(Usage(format!("config is for `{v}`, not `{verb}`")).into());
        }
    }
    Ok(Some(serde_json::from_value(value).map_err(Error::from)?))
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    schema: &'static str,
    verb: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(dir, name, &text)
}

fn write_config<T: Serialize>(dir: &Path, verb: &str, cfg: &T) -> Result<()> {
    write_json(
        dir,
        "config.json",
        &Tagged {
            schema: CONFIG_SCHEMA,
            verb,
            body: cfg,
        },
    )
}

fn read_sequence(path: &Path) -> Result<EventSequence> {
    let file = fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    EventSequence::parse(std::io::BufReader::new(file))
}

fn load_patterns(arg: &str) -> Result<Vec<PatternSpec>> {
    if let Some(p) = preset_patterns(arg) {
        return Ok(p);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::Domain(format!(
            "{arg:?} is neither a pattern file nor a preset ({})",
            PRESET_NAMES.join(", ")
        )));
    }
    PatternSpec::from_json(&fs::read_to_string(path)?)
}

// ---- simulate

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SimulateConfig {
    sim: SimParams,
    scheme: ConnectionScheme,
    #[serde(default)]
    patterns: Vec<PatternSpec>,
}

fn cmd_simulate(a: SimulateArgs) -> CliResult<()> {
    let mut cfg = load_config::<SimulateConfig>(&a.common.config, "simulate")?.unwrap_or(SimulateConfig {
        sim: SimParams::default(),
        scheme: ConnectionScheme::BernoulliPairs,
        patterns: Vec::new(),
    });
    if let Some(name) = &a.preset {
        let specs = preset_patterns(name)
            .ok_or_else(|| Usage(format!("unknown preset {name:?}; known: {}", PRESET_NAMES.join(", "))))?;
        cfg.patterns = specs;
        if let Some(d) = preset_duration(name) {
            cfg.sim.duration = d;
        }
    }
    for p in &a.pattern {
        cfg.patterns.extend(load_patterns(p)?);
    }
    a.sim.apply(&mut cfg.sim);
    if let Some(s) = a.scheme {
        cfg.scheme = s;
    }
    cfg.sim.validate()?;

    let mut net = build_network(&cfg.sim, cfg.scheme, &mut setup_rng(cfg.sim.seed))?;
    for spec in &cfg.patterns {
        net = embed_pattern(&net, spec, &cfg.sim)?;
    }
    let seq = simulate(&net, &cfg.sim)?;
    let dir = &a.common.out;
    write_file(dir, "events.csv", &seq.to_csv_string())?;
    write_json(dir, "network.json", &net)?;
    write_config(dir, "simulate", &cfg)?;
    eprintln!("{} events from {} neurons over {} s", seq.len(), cfg.sim.n_neurons, cfg.sim.duration);
    Ok(())
}

// ---- mining

#[derive(Clone, Debug, Serialize, Deserialize)]
struct MineConfig {
    input: PathBuf,
    mining: MiningConfig,
    #[serde(default)]
    raster: bool,
}

fn resolve_input(arg: Option<PathBuf>, cfg: Option<PathBuf>) -> CliResult<PathBuf> {
    arg.or(cfg).ok_or_else(|| Usage("missing input events file".into()).into())
}

fn print_levels(mined: &crate::MinedLevels, seq: &EventSequence) {
    if let Some(k) = mined.max_level() {
        for r in mined.level(k) {
            println!("{} : {}", r.episode.display(seq.alphabet()), r.count);
        }
    }
}

/// Occurrence overlay rows: one per event of every recorded occurrence.
fn raster_csv<'a>(
    seq: &EventSequence,
    results: impl IntoIterator<Item = (&'a FrequentEpisodeResult, Vec<Vec<usize>>)>,
) -> String {
    let mut out = String::from("# schema: epimine-raster/1\ntime,neuron_id,episode_id,occurrence_id\n");
    for (eid, (_, occs)) in results.into_iter().enumerate() {
        for (oid, idx) in occs.iter().enumerate() {
            let mut idx = idx.clone();
            idx.sort_unstable();
            for i in idx {
                out += &format!("{:.9},{},{eid},{oid}\n", seq.events()[i].time, seq.label_of(i));
            }
        }
    }
    out
}

fn episode_index_csv<'a>(seq_alphabet: &crate::Alphabet, results: impl IntoIterator<Item = &'a FrequentEpisodeResult>) -> String {
    let mut out = String::from("# schema: epimine-raster-episodes/1\nepisode_id,episode,count\n");
    for (i, r) in results.into_iter().enumerate() {
        out += &format!("{i},\"{}\",{}\n", r.episode.display(seq_alphabet), r.count);
    }
    out
}

fn finish_mining(
    dir: &Path,
    verb: &str,
    cfg: &MineConfig,
    seq: &EventSequence,
    mined: &crate::MinedLevels,
) -> CliResult<()> {
    let threshold = cfg.mining.threshold_count(seq.len());
    write_json(dir, "episodes.json", &MiningOutput::new(mined, seq.alphabet(), seq.len(), threshold))?;
    if cfg.raster {
        let top: Vec<&FrequentEpisodeResult> = mined.max_level().map_or(Vec::new(), |k| mined.level(k).iter().collect());
        let rows = top.iter().map(|r| {
            let occ = r.occurrences.as_ref().map_or(Vec::new(), |o| o.iter().map(|x| x.event_indices.clone()).collect());
            (*r, occ)
        });
        write_file(dir, "raster.csv", &raster_csv(seq, rows))?;
        write_file(dir, "raster_episodes.csv", &episode_index_csv(seq.alphabet(), top.iter().copied()))?;
    }
    write_config(dir, verb, cfg)?;
    if let Some(k) = mined.truncated_at {
        eprintln!("warning: candidate budget reached at size {k}");
    }
    print_levels(mined, seq);
    Ok(())
}

fn cmd_parallel(a: ParallelArgs) -> CliResult<()> {
    let loaded = load_config::<MineConfig>(&a.common.config, "mine-parallel")?;
    let input = resolve_input(a.input, loaded.as_ref().map(|c| c.input.clone()))?;
    let raster = a.raster || loaded.as_ref().is_some_and(|c| c.raster);
    let mut mining = loaded.map_or_else(MiningConfig::default, |c| c.mining);
    if let Some(e) = a.expiry {
        mining.expiry = Some(e);
    }
    if mining.expiry.is_none() {
        return Err(Usage("--expiry is required".into()).into());
    }
    a.thresholds.apply(&mut mining);
    mining.record_occurrences = raster;
    mining.validate()?;
    let cfg = MineConfig { input, mining, raster };
    let seq = read_sequence(&cfg.input)?;
    let mined = mine_parallel(&seq, &cfg.mining)?;
    finish_mining(&a.common.out, "mine-parallel", &cfg, &seq, &mined)
}

fn cmd_serial(a: SerialArgs) -> CliResult<()> {
    let loaded = load_config::<MineConfig>(&a.common.config, "mine-serial")?;
    let input = resolve_input(a.input, loaded.as_ref().map(|c| c.input.clone()))?;
    let raster = a.raster || loaded.as_ref().is_some_and(|c| c.raster);
    let mut mining = loaded.map_or_else(MiningConfig::default, |c| c.mining);
    if !a.intervals.is_empty() {
        mining.candidate_intervals = a.intervals;
    }
    if mining.candidate_intervals.is_empty() {
        return Err(Usage("at least one --intervals low:high is required".into()).into());
    }
    a.thresholds.apply(&mut mining);
    mining.record_occurrences = raster;
    mining.validate()?;
    let cfg = MineConfig { input, mining, raster };
    let seq = read_sequence(&cfg.input)?;
    let mined = mine_serial(&seq, &cfg.mining)?;
    if a.confidence {
        let mut out = String::from("# schema: epimine-confidence/1\nepisode,edge,from,to,ratio\n");
        for r in mined.max_level().map_or(&[][..], |k| mined.level(k)) {
            let ratios = crate::significance::confidence_ratio(&seq, &r.episode)?;
            let nodes = r.episode.nodes();
            for (e, ratio) in ratios.iter().enumerate() {
                let ratio = ratio.map_or("undefined".to_string(), |x| format!("{x:.6}"));
                out += &format!(
                    "\"{}\",{e},{},{},{ratio}\n",
                    r.episode.display(seq.alphabet()),
                    seq.alphabet().label(nodes[e]),
                    seq.alphabet().label(nodes[e + 1])
                );
            }
        }
        write_file(&a.common.out, "confidence.csv", &out)?;
    }
    finish_mining(&a.common.out, "mine-serial", &cfg, &seq, &mined)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SynfireConfig {
    input: PathBuf,
    parallel: MiningConfig,
    serial: MiningConfig,
    #[serde(default)]
    raster: bool,
}

fn cmd_synfire(a: SynfireArgs) -> CliResult<()> {
    let loaded = load_config::<SynfireConfig>(&a.common.config, "mine-synfire")?;
    let input = resolve_input(a.input, loaded.as_ref().map(|c| c.input.clone()))?;
    let raster = a.raster || loaded.as_ref().is_some_and(|c| c.raster);
    let (mut pcfg, mut scfg) = loaded.map_or_else(
        || (MiningConfig::default(), MiningConfig::default()),
        |c| (c.parallel, c.serial),
    );
    if let Some(e) = a.expiry {
        pcfg.expiry = Some(e);
    }
    if pcfg.expiry.is_none() {
        return Err(Usage("--expiry is required".into()).into());
    }
    if !a.intervals.is_empty() {
        scfg.candidate_intervals = a.intervals;
    }
    if scfg.candidate_intervals.is_empty() {
        return Err(Usage("at least one --intervals low:high is required".into()).into());
    }
    a.thresholds.apply(&mut pcfg);
    a.thresholds.apply(&mut scfg);
    pcfg.record_occurrences = true;
    scfg.record_occurrences = raster;
    pcfg.validate()?;
    scfg.validate()?;
    let cfg = SynfireConfig {
        input,
        parallel: pcfg,
        serial: scfg,
        raster,
    };
    let seq = read_sequence(&cfg.input)?;
    let r = mine_synfire(&seq, &cfg.parallel, &cfg.serial)?;
    let dir = &a.common.out;
    write_json(dir, "synfire.json", &SynfireOutput::new(&r, seq.alphabet(), seq.len()))?;
    write_file(dir, "substituted.csv", &r.substituted.to_csv_string())?;
    if cfg.raster {
        // chain occurrences point into the rewritten sequence; expand
        // composite events back to their source spikes
        let sources: HashMap<usize, &[usize]> = r
            .map
            .replacements
            .iter()
            .map(|rep| (rep.output_index, rep.source_indices.as_slice()))
            .collect();
        let subst_time: Vec<f64> = r.substituted.events().iter().map(|e| e.time).collect();
        let chains = r.longest_chains();
        let rows = chains.iter().map(|c| {
            let occs = c.occurrences.as_ref().map_or(Vec::new(), |o| {
                o.iter()
                    .map(|x| {
                        x.event_indices
                            .iter()
                            .flat_map(|&i| match sources.get(&i) {
                                Some(src) => src.to_vec(),
                                None => original_index(&seq, &r.substituted, i, subst_time[i]).into_iter().collect(),
                            })
                            .collect()
                    })
                    .collect()
            });
            (c, occs)
        });
        write_file(dir, "raster.csv", &raster_csv(&seq, rows))?;
        let mut idx = String::from("# schema: epimine-raster-episodes/1\nepisode_id,episode,count\n");
        for (i, c) in chains.iter().enumerate() {
            idx += &format!("{i},\"{}\",{}\n", r.display(c), c.count);
        }
        write_file(dir, "raster_episodes.csv", &idx)?;
    }
    write_config(dir, "mine-synfire", &cfg)?;
    for g in &r.groups {
        println!("{} : {}", g.episode.display(seq.alphabet()), g.count);
    }
    for c in r.longest_chains() {
        println!("{} : {}", r.display(c), c.count);
    }
    Ok(())
}

/// Position in `original` of an event carried over unchanged into `rewritten`.
fn original_index(original: &EventSequence, rewritten: &EventSequence, i: usize, time: f64) -> Option<usize> {
    let label = rewritten.label_of(i);
    let start = original.events().partition_point(|e| e.time < time);
    (start..original.len())
        .take_while(|&j| original.events()[j].time == time)
        .find(|&j| original.label_of(j) == label)
}

// ---- significance

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SignificanceConfig {
    sim: SimParams,
    null: NullParams,
    mining: EnsembleMining,
    null_kinds: Vec<NullKind>,
    n_null: usize,
    n_pattern: usize,
    scheme: ConnectionScheme,
    #[serde(default)]
    patterns: Vec<PatternSpec>,
    safety_factor: f64,
    #[serde(default)]
    observed: Vec<(usize, u64)>,
}

#[derive(Serialize)]
struct SignificanceOutput {
    schema: &'static str,
    null: FrequencyStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pattern: Option<FrequencyStats>,
    thresholds: Vec<u64>,
    p_values: Vec<ObservedP>,
}

#[derive(Serialize)]
struct ObservedP {
    size: usize,
    count: u64,
    #[serde(flatten)]
    p: PValue,
}

fn cmd_significance(a: SignificanceArgs) -> CliResult<()> {
    let loaded = load_config::<SignificanceConfig>(&a.common.config, "significance")?;
    let mut cfg = match loaded {
        Some(c) => c,
        None => {
            let serial = matches!(a.episodes.as_deref(), Some("serial")) || a.preset.is_some();
            let (mining, pattern) = if serial {
                let iv = IntervalConstraint::new(0.004, 0.006)?;
                (EnsembleMining::serial(vec![iv], 10), "significance-serial")
            } else {
                (EnsembleMining::parallel(0.001, 10), "significance")
            };
            SignificanceConfig {
                sim: SimParams::default(),
                null: NullParams::default(),
                mining,
                null_kinds: NullKind::ALL.to_vec(),
                n_null: 20,
                n_pattern: 5,
                scheme: ConnectionScheme::BernoulliPairs,
                patterns: preset_patterns(pattern).unwrap_or_default(),
                safety_factor: 2.0,
                observed: Vec::new(),
            }
        }
    };
    match a.episodes.as_deref() {
        None => {}
        Some("parallel") if cfg.mining.kind != crate::EpisodeKind::Parallel => {
            cfg.mining = EnsembleMining::parallel(0.001, cfg.mining.max_size);
            cfg.patterns = preset_patterns("significance").unwrap_or_default();
        }
        Some("serial") if cfg.mining.kind != crate::EpisodeKind::Serial => {
            cfg.mining = EnsembleMining::serial(vec![IntervalConstraint::new(0.004, 0.006)?], cfg.mining.max_size);
            cfg.patterns = preset_patterns("significance-serial").unwrap_or_default();
        }
        Some("parallel") | Some("serial") => {}
        Some(other) => return Err(Usage(format!("--episodes must be parallel or serial, got {other:?}")).into()),
    }
    match a.preset.as_deref() {
        None => {}
        Some("interval-discovery") => {
            cfg.mining.intervals = [(0.002, 0.004), (0.004, 0.006), (0.006, 0.008)]
                .iter()
                .map(|&(l, h)| IntervalConstraint::new(l, h))
                .collect::<Result<_>>()?;
            cfg.null_kinds = NullKind::ALL.iter().copied().filter(|k| *k != NullKind::RandomNetwork).collect();
        }
        Some(other) => return Err(Usage(format!("unknown significance preset {other:?}")).into()),
    }
    a.sim.apply(&mut cfg.sim);
    if let Some(e) = a.expiry {
        cfg.mining.expiry = Some(e);
    }
    if !a.intervals.is_empty() {
        cfg.mining.intervals = a.intervals;
    }
    if let Some(k) = a.max_size {
        cfg.mining.max_size = k;
    }
    if let Some(b) = a.budget {
        cfg.mining.candidate_budget = b;
    }
    if let Some(n) = a.nulls {
        cfg.n_null = n;
    }
    if let Some(n) = a.pattern_datasets {
        cfg.n_pattern = n;
    }
    if !a.null_kinds.is_empty() {
        cfg.null_kinds = a.null_kinds;
    }
    if let Some(p) = &a.pattern {
        cfg.patterns = load_patterns(p)?;
    }
    if let Some(f) = a.safety_factor {
        cfg.safety_factor = f;
    }
    cfg.observed.extend(a.observed);
    if cfg.n_null == 0 {
        return Err(Usage("--nulls must be at least 1".into()).into());
    }

    let null = null_ensemble_stats(&cfg.null_kinds, cfg.n_null, &cfg.mining, &cfg.sim, &cfg.null, cfg.sim.seed)?;
    let pattern = if cfg.n_pattern > 0 && !cfg.patterns.is_empty() {
        Some(pattern_ensemble_stats(
            &cfg.patterns,
            cfg.n_pattern,
            &cfg.mining,
            &cfg.sim,
            cfg.scheme,
            cfg.sim.seed,
        )?)
    } else {
        None
    };
    let thresholds = calibrate_threshold(&null, cfg.safety_factor)?;
    let p_values = cfg
        .observed
        .iter()
        .map(|&(size, count)| Ok(ObservedP { size, count, p: p_value(count, size, &null)? }))
        .collect::<Result<Vec<_>>>()?;

    let dir = &a.common.out;
    write_file(dir, "null_stats.csv", &null.to_csv())?;
    if let Some(p) = &pattern {
        write_file(dir, "pattern_stats.csv", &p.to_csv())?;
    }
    let mut tcsv = String::from("# schema: epimine-thresholds/1\nsize,threshold\n");
    for (k, t) in thresholds.iter().enumerate() {
        tcsv += &format!("{},{t}\n", k + 1);
    }
    write_file(dir, "thresholds.csv", &tcsv)?;
    write_json(
        dir,
        "stats.json",
        &SignificanceOutput {
            schema: "epimine-significance/1",
            null: null.clone(),
            pattern: pattern.clone(),
            thresholds,
            p_values,
        },
    )?;
    write_config(dir, "significance", &cfg)?;
    if !null.truncated.is_empty() {
        eprintln!("warning: candidate budget reached in null datasets {:?}", null.truncated);
    }
    println!("size  null_avg  null_max  pattern_min");
    for r in null.rows() {
        let pmin = pattern.as_ref().map_or("-".to_string(), |p| p.row(r.size).map(|x| x.min.to_string()).unwrap_or_default());
        println!("{:>4}  {:>8.2}  {:>8}  {:>11}", r.size, r.avg, r.max, pmin);
    }
    Ok(())
}

// ---- similarity

#[derive(Deserialize)]
struct ManifestEntry {
    label: String,
    path: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SetFile {
    Mined(MiningOutput),
    Paths { episodes: Vec<Vec<String>> },
}

fn cmd_similarity(a: SimilarityArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.manifest).map_err(Error::from)?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text).map_err(Error::from)?;
    if entries.is_empty() {
        return Err(Usage("manifest lists no episode sets".into()).into());
    }
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let mut sets = Vec::with_capacity(entries.len());
    for e in &entries {
        let path = if e.path.is_absolute() { e.path.clone() } else { base.join(&e.path) };
        let file: SetFile = serde_json::from_str(&fs::read_to_string(&path).map_err(Error::from)?).map_err(Error::from)?;
        let mut paths: Vec<Vec<String>> = match file {
            SetFile::Mined(m) => {
                let mut eps: Vec<_> = m.episodes(a.size).collect();
                eps.sort_by(|x, y| y.count.cmp(&x.count));
                eps.into_iter().map(|r| r.episode.nodes.clone()).collect()
            }
            SetFile::Paths { episodes } => episodes,
        };
        if let Some(n) = a.top {
            paths.truncate(n);
        }
        sets.push(EpisodeSet::new(e.label.clone(), paths)?);
    }
    let m = cross_similarity(&sets)?;
    let labels: Vec<String> = sets.iter().map(|s| s.label.clone()).collect();
    write_file(&a.out, "similarity.csv", &matrix_csv(&labels, &m))?;
    // plotting rows bottom-up puts the diagonal from lower left to upper right
    let mut order = String::from("# schema: epimine-ordering/1\nindex,plot_row,label\n");
    for (i, l) in labels.iter().enumerate() {
        order += &format!("{i},{},{l}\n", labels.len() - 1 - i);
    }
    write_file(&a.out, "ordering.csv", &order)?;
    print!("{}", matrix_csv(&labels, &m));
    Ok(())
}
