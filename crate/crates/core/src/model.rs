//! Event and episode data model.
//!
//! Event types are interned into a dense [`Alphabet`]; everything downstream
//! (counting automata, candidate generation) works on the integer ids and only
//! goes back to labels for display and serialization.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Absolute slack applied to every time comparison (seconds).
pub const TIME_TOLERANCE: f64 = 1e-9;

/// Dense event type id, an index into an [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventType(pub u32);

impl EventType {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Bijective label <-> id mapping. Ids are handed out in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, EventType>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Alphabet::new();
        for label in labels {
            let label = label.into();
            if alphabet.index.contains_key(&label) {
                return domain(format!("duplicate event type label {label:?}"));
            }
            alphabet.intern(&label);
        }
        Ok(alphabet)
    }

    /// Returns the id for `label`, allocating the next dense id if unseen.
    pub fn intern(&mut self, label: &str) -> EventType {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = EventType(self.labels.len() as u32);
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<EventType> {
        self.index.get(label).copied()
    }

    pub fn resolve(&self, label: &str) -> Result<EventType> {
        self.get(label).ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn label(&self, id: EventType) -> &str {
        &self.labels[id.index()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, id: EventType) -> bool {
        id.index() < self.labels.len()
    }

    pub fn types(&self) -> impl Iterator<Item = EventType> + '_ {
        (0..self.labels.len() as u32).map(EventType)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub etype: EventType,
    pub time: f64,
}

/// Time-ordered list of events over a fixed alphabet.
///
/// Construction sorts stably by time, so events with equal timestamps keep
/// their input order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventSequence {
    events: Vec<Event>,
    alphabet: Alphabet,
}

impl EventSequence {
    pub fn new(alphabet: Alphabet, mut events: Vec<Event>) -> Result<Self> {
        for e in &events {
            if !e.time.is_finite() {
                return domain(format!("non-finite event time {}", e.time));
            }
            if e.time < 0.0 {
                return domain(format!("negative event time {}", e.time));
            }
            if !alphabet.contains(e.etype) {
                return domain(format!("event type id {} outside alphabet", e.etype.0));
            }
        }
        events.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(EventSequence { events, alphabet })
    }

    /// Builds a sequence from `(label, time)` pairs, interning labels in
    /// first-seen order.
    pub fn from_labeled<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut alphabet = Alphabet::new();
        let events = pairs
            .into_iter()
            .map(|(label, time)| Event {
                etype: alphabet.intern(label.as_ref()),
                time,
            })
            .collect();
        EventSequence::new(alphabet, events)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Per-type event counts, indexed by type id.
    pub fn histogram(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.alphabet.len()];
        for e in &self.events {
            counts[e.etype.index()] += 1;
        }
        counts
    }

    pub fn label_of(&self, idx: usize) -> &str {
        self.alphabet.label(self.events[idx].etype)
    }

    /// Parses the `label,time` CSV format. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut alphabet = Alphabet::new();
        let mut events = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (label, time) = trimmed.rsplit_once(',').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected \"label,time\", got {trimmed:?}"),
            })?;
            let label = label.trim();
            if label.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "empty label".into(),
                });
            }
            let time: f64 = time.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid time {:?}", time.trim()),
            })?;
            if !time.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("non-finite time {time}"),
                });
            }
            if time < 0.0 {
                return domain(format!("line {lineno}: negative time {time}"));
            }
            events.push(Event {
                etype: alphabet.intern(label),
                time,
            });
        }
        EventSequence::new(alphabet, events)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::parse(text.as_bytes())
    }

    /// Writes the `label,time` format with nine decimal digits, preceded by
    /// a schema comment line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# schema: epimine-events/1 (label,time)")?;
        for e in &self.events {
            writeln!(w, "{},{:.9}", self.alphabet.label(e.etype), e.time)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("labels are valid UTF-8")
    }
}

/// Half-open inter-event interval `(low, high]` in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct IntervalConstraint {
    low: f64,
    high: f64,
}

impl IntervalConstraint {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite()) || low < 0.0 || low >= high {
            return domain(format!("invalid interval ({low}, {high}]: need 0 <= low < high"));
        }
        Ok(IntervalConstraint { low, high })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn high(&self) -> f64 {
        self.high
    }

    /// `low < gap <= high`, both ends widened by [`TIME_TOLERANCE`] in the
    /// direction that absorbs round-off in `gap`.
    pub fn contains(&self, gap: f64) -> bool {
        gap > self.low + TIME_TOLERANCE && gap <= self.high + TIME_TOLERANCE
    }

    /// True once `gap` is past the upper end for good.
    pub fn expired(&self, gap: f64) -> bool {
        gap > self.high + TIME_TOLERANCE
    }

    pub fn overlaps(&self, other: &IntervalConstraint) -> bool {
        self.low < other.high && other.low < self.high
    }
}

impl TryFrom<[f64; 2]> for IntervalConstraint {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        IntervalConstraint::new(v[0], v[1])
    }
}

impl From<IntervalConstraint> for [f64; 2] {
    fn from(c: IntervalConstraint) -> Self {
        [c.low, c.high]
    }
}

impl fmt::Display for IntervalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}]", self.low, self.high)
    }
}

/// Sorts the intervals by lower bound and checks they are pairwise disjoint.
pub fn normalize_interval_set(mut intervals: Vec<IntervalConstraint>) -> Result<Vec<IntervalConstraint>> {
    intervals.sort_by(|a, b| a.low.total_cmp(&b.low));
    for pair in intervals.windows(2) {
        if pair[0].overlaps(&pair[1]) {
            return domain(format!("candidate intervals {} and {} overlap", pair[0], pair[1]));
        }
    }
    Ok(intervals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeKind {
    Serial,
    Parallel,
}

/// A serial or parallel episode over dense event type ids.
///
/// Parallel episodes are kept in canonical form (nodes sorted by id, no
/// repeats). Serial episodes carry either no intervals or exactly one per
/// consecutive node pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    kind: EpisodeKind,
    nodes: Vec<EventType>,
    intervals: Vec<IntervalConstraint>,
}

impl Episode {
    pub fn serial(nodes: Vec<EventType>, intervals: Vec<IntervalConstraint>) -> Result<Self> {
        if nodes.is_empty() {
            return domain("episode must have at least one node");
        }
        if !intervals.is_empty() && intervals.len() != nodes.len() - 1 {
            return domain(format!(
                "serial episode with {} nodes needs {} intervals, got {}",
                nodes.len(),
                nodes.len() - 1,
                intervals.len()
            ));
        }
        Ok(Episode {
            kind: EpisodeKind::Serial,
            nodes,
            intervals,
        })
    }

    pub fn parallel(mut nodes: Vec<EventType>) -> Result<Self> {
        if nodes.is_empty() {
            return domain("episode must have at least one node");
        }
        nodes.sort_unstable();
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return domain("parallel episode has repeated event types");
        }
        Ok(Episode {
            kind: EpisodeKind::Parallel,
            nodes,
            intervals: Vec::new(),
        })
    }

    pub fn kind(&self) -> EpisodeKind {
        self.kind
    }

    pub fn nodes(&self) -> &[EventType] {
        &self.nodes
    }

    pub fn intervals(&self) -> &[IntervalConstraint] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether `self` embeds in `alpha`: as an order-preserving subsequence
    /// for serial episodes, as a subset for parallel ones. Intervals are
    /// not considered.
    pub fn is_subepisode_of(&self, alpha: &Episode) -> Result<bool> {
        if self.kind != alpha.kind {
            return domain("subepisode relation needs episodes of the same kind");
        }
        Ok(match self.kind {
            EpisodeKind::Serial => {
                let mut rest = alpha.nodes.iter();
                self.nodes.iter().all(|n| rest.any(|m| m == n))
            }
            EpisodeKind::Parallel => self.nodes.iter().all(|n| alpha.nodes.binary_search(n).is_ok()),
        })
    }

    /// Renders with labels, e.g. `A -(0.004,0.006]-> B` or `A B C`.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> EpisodeDisplay<'a> {
        EpisodeDisplay { episode: self, alphabet }
    }
}

pub struct EpisodeDisplay<'a> {
    episode: &'a Episode,
    alphabet: &'a Alphabet,
}

impl fmt::Display for EpisodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ep = self.episode;
        for (i, n) in ep.nodes.iter().enumerate() {
            if i > 0 {
                match (ep.kind, ep.intervals.get(i - 1)) {
                    (EpisodeKind::Serial, Some(iv)) => write!(f, " -({},{}]-> ", iv.low, iv.high)?,
                    (EpisodeKind::Serial, None) => write!(f, " -> ")?,
                    (EpisodeKind::Parallel, _) => write!(f, " ")?,
                }
            }
            write!(f, "{}", self.alphabet.label(*n))?;
        }
        Ok(())
    }
}

/// Positions into an [`EventSequence`], one per episode node, in node order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OccurrenceRecord {
    pub event_indices: Vec<usize>,
}

impl OccurrenceRecord {
    /// First and last event position used by the occurrence.
    pub fn span(&self) -> (usize, usize) {
        let lo = self.event_indices.iter().copied().min().unwrap_or(0);
        let hi = self.event_indices.iter().copied().max().unwrap_or(0);
        (lo, hi)
    }

    /// Two occurrences are non-overlapped when every event of one comes
    /// strictly before every event of the other.
    pub fn non_overlapped_with(&self, other: &OccurrenceRecord) -> bool {
        let (a_lo, a_hi) = self.span();
        let (b_lo, b_hi) = other.span();
        a_hi < b_lo || b_hi < a_lo
    }
}

pub fn pairwise_non_overlapped(occurrences: &[OccurrenceRecord]) -> bool {
    occurrences
        .iter()
        .enumerate()
        .all(|(i, a)| occurrences[i + 1..].iter().all(|b| a.non_overlapped_with(b)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    /// Fraction of the sequence length an episode must reach.
    pub threshold_fraction: f64,
    /// Absolute count threshold; overrides `threshold_fraction` when set.
    #[serde(default)]
    pub min_count: Option<u64>,
    /// Expiry time for parallel episodes (seconds).
    #[serde(default)]
    pub expiry: Option<f64>,
    /// Candidate inter-event intervals for serial episodes.
    #[serde(default)]
    pub candidate_intervals: Vec<IntervalConstraint>,
    pub max_size: usize,
    #[serde(default)]
    pub record_occurrences: bool,
    /// Upper bound on candidates per level; levels beyond it are truncated.
    #[serde(default)]
    pub candidate_budget: Option<usize>,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            threshold_fraction: 0.01,
            min_count: None,
            expiry: None,
            candidate_intervals: Vec::new(),
            max_size: 10,
            record_occurrences: false,
            candidate_budget: None,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold_fraction) {
            return domain(format!("threshold fraction {} outside [0,1]", self.threshold_fraction));
        }
        if self.max_size == 0 {
            return domain("max_size must be positive");
        }
        if let Some(tx) = self.expiry {
            if !(tx > 0.0 && tx.is_finite()) {
                return domain(format!("expiry must be positive, got {tx}"));
            }
        }
        normalize_interval_set(self.candidate_intervals.clone())?;
        Ok(())
    }

    /// Minimum count for a sequence of `n` events.
    pub fn threshold_count(&self, n: usize) -> u64 {
        threshold_count(n, self.threshold_fraction, self.min_count)
    }
}

pub fn threshold_count(n: usize, fraction: f64, min_count: Option<u64>) -> u64 {
    match min_count {
        Some(c) => c,
        // the small slack keeps 0.01 * 25000 at 250 rather than 251
        None => (n as f64 * fraction - 1e-9).ceil().max(0.0) as u64,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrequentEpisodeResult {
    pub episode: Episode,
    pub count: u64,
    pub occurrences: Option<Vec<OccurrenceRecord>>,
}
