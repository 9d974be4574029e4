//! Similarity between sets of equal-size serial episodes.
//!
//! Common episodes are counted and removed level by level. Survivors are
//! replaced by their drop-first and drop-last subepisodes until single
//! nodes remain; level `i` contributes `2^i` per common episode.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{Alphabet, Episode};

/// A labeled set of event-type paths, all with `size` nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeSet {
    pub label: String,
    size: usize,
    paths: BTreeSet<Vec<String>>,
}

impl EpisodeSet {
    pub fn new<I>(label: impl Into<String>, paths: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let paths: BTreeSet<Vec<String>> = paths.into_iter().collect();
        let size = paths.iter().next().map_or(0, Vec::len);
        if paths.iter().any(|p| p.len() != size) {
            return domain("all episodes in a set must have the same size");
        }
        if paths.contains(&Vec::new()) {
            return domain("empty episodes are not allowed");
        }
        Ok(EpisodeSet {
            label: label.into(),
            size,
            paths,
        })
    }

    /// Builds a set from mined serial episodes; intervals are dropped.
    pub fn from_episodes<'a, I>(label: impl Into<String>, episodes: I, alphabet: &Alphabet) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Episode>,
    {
        let paths = episodes
            .into_iter()
            .map(|e| e.nodes().iter().map(|&t| alphabet.label(t).to_string()).collect())
            .collect::<Vec<Vec<String>>>();
        Self::new(label, paths)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> impl Iterator<Item = &Vec<String>> {
        self.paths.iter()
    }
}

type Level = BTreeSet<Vec<String>>;

fn decompose(level: &Level) -> Level {
    let mut out = Level::new();
    for p in level {
        out.insert(p[1..].to_vec());
        out.insert(p[..p.len() - 1].to_vec());
    }
    out
}

/// `sum_i 2^i * n_i` where `n_i` is the number of common `i`-node paths after
/// removing the common ones at every larger size.
pub fn sim_score(a: &EpisodeSet, b: &EpisodeSet) -> Result<u64> {
    if a.is_empty() || b.is_empty() {
        return Ok(0);
    }
    if a.size != b.size {
        return domain(format!("episode sizes differ: {} vs {}", a.size, b.size));
    }
    let mut left = a.paths.clone();
    let mut right = b.paths.clone();
    let mut score = 0u64;
    for i in (1..=a.size).rev() {
        let common: Level = left.intersection(&right).cloned().collect();
        score += (1u64 << i) * common.len() as u64;
        left.retain(|p| !common.contains(p));
        right.retain(|p| !common.contains(p));
        if i > 1 {
            left = decompose(&left);
            right = decompose(&right);
        }
    }
    Ok(score)
}

/// Pairwise scores, `m[i][j] = sim_score(sets[i], sets[j])`.
pub fn cross_similarity(sets: &[EpisodeSet]) -> Result<Vec<Vec<u64>>> {
    let n = sets.len();
    let cells: Vec<u64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if j < i {
                Ok(0)
            } else {
                sim_score(&sets[i], &sets[j])
            }
        })
        .collect::<Result<_>>()?;
    let mut m = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i..n {
            m[i][j] = cells[i * n + j];
            m[j][i] = cells[i * n + j];
        }
    }
    Ok(m)
}

pub fn matrix_csv(labels: &[String], m: &[Vec<u64>]) -> String {
    let mut out = String::from("# schema: epimine-similarity/1\nlabel");
    for l in labels {
        out += &format!(",{l}");
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(m) {
        out += l;
        for v in row {
            out += &format!(",{v}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(label: &str, paths: &[&str]) -> EpisodeSet {
        EpisodeSet::new(label, paths.iter().map(|p| p.chars().map(|c| c.to_string()).collect())).unwrap()
    }

    #[test]
    fn worked_example() {
        let a = set("a", &["ABC"]);
        let b = set("b", &["BCD"]);
        assert_eq!(sim_score(&a, &b).unwrap(), 4);
        assert_eq!(sim_score(&b, &a).unwrap(), 4);
    }

    #[test]
    fn identity_and_disjoint() {
        let paths: Vec<String> = (0..20).map(|i| format!("{}BCDEFG", (b'a' + i) as char)).collect();
        let refs: Vec<&str> = paths.iter().map(String::as_str).collect();
        let a = set("a", &refs);
        assert_eq!(sim_score(&a, &a).unwrap(), 2560);
        let x = set("x", &["ABC", "BCA"]);
        let y = set("y", &["DEF"]);
        assert_eq!(sim_score(&x, &y).unwrap(), 0);
    }

    #[test]
    fn size_mismatch() {
        assert!(sim_score(&set("a", &["AB"]), &set("b", &["ABC"])).is_err());
        assert!(EpisodeSet::new("bad", vec![vec!["A".to_string()], vec!["A".into(), "B".into()]]).is_err());
    }

    #[test]
    fn matrix() {
        let sets = vec![set("a", &["ABC"]), set("b", &["BCD"]), set("c", &["XYZ", "ZYX"])];
        let m = cross_similarity(&sets).unwrap();
        assert_eq!(m, vec![vec![8, 4, 0], vec![4, 8, 0], vec![0, 0, 16]]);
        assert_eq!(cross_similarity(&sets[..1]).unwrap(), vec![vec![8]]);
        let csv = matrix_csv(&["a".into(), "b".into(), "c".into()], &m);
        assert!(csv.contains("b,4,8,0"));
    }
}
