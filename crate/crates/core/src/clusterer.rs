//! Average-linkage agglomerative clustering under cosine distance, and
//! external scores (purity, adjusted Rand index) against a gold partition.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::embeddings::{cosine, PhraseVector};

/// Default stop threshold on cosine distance.
pub const DEFAULT_THETA: f64 = 0.4;

/// The largest possible cosine distance. A threshold at or above it merges
/// everything, antipodal pairs included.
pub const MAX_DISTANCE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterError {
    #[error("nothing to cluster")]
    EmptyInput,
    #[error("duplicate phrase id {0:?}")]
    DuplicateId(String),
    #[error("vector {id:?} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("threshold {0} is negative or NaN")]
    InvalidThreshold(String),
    #[error("partitions cover different id sets")]
    UniverseMismatch,
    #[error("partition is not a disjoint cover: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Linkage {
    #[default]
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Distance {
    #[default]
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterParams {
    pub linkage: Linkage,
    pub distance: Distance,
    pub threshold: f64,
}

/// Clusters of phrase ids. Members are sorted within a cluster and clusters
/// are ordered by their smallest member, so equal partitions compare equal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    pub clusters: Vec<Vec<String>>,
    pub params: Option<ClusterParams>,
}

impl Partition {
    /// Builds a partition from arbitrary clusters, checking that they are
    /// nonempty and disjoint.
    pub fn from_clusters(clusters: Vec<Vec<String>>) -> Result<Self, ClusterError> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(clusters.len());
        for mut c in clusters {
            if c.is_empty() {
                return Err(ClusterError::Malformed(String::from("empty cluster")));
            }
            for id in &c {
                if !seen.insert(id.clone()) {
                    return Err(ClusterError::DuplicateId(id.clone()));
                }
            }
            c.sort();
            out.push(c);
        }
        out.sort();
        Ok(Self {
            clusters: out,
            params: None,
        })
    }

    pub fn ids(&self) -> BTreeSet<&str> {
        self.clusters.iter().flatten().map(String::as_str).collect()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Index of the cluster holding `id`.
    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.iter().any(|m| m == id))
    }

    /// True when `a` and `b` share a cluster.
    pub fn together(&self, a: &str, b: &str) -> bool {
        matches!((self.cluster_of(a), self.cluster_of(b)), (Some(x), Some(y)) if x == y)
    }
}

/// Agglomerative clustering: repeatedly merges the two clusters with the
/// smallest average pairwise cosine distance while that distance is below
/// `theta`. Ties go to the pair whose smallest member ids sort first.
///
/// Zero vectors are allowed; they sit at distance 1 from everything.
pub fn cluster(vectors: &[PhraseVector], theta: f64) -> Result<Partition, ClusterError> {
    if theta.is_nan() || theta < 0.0 {
        return Err(ClusterError::InvalidThreshold(alloc::format!("{theta}")));
    }
    if vectors.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    let dim = vectors[0].v.len();
    let mut items: Vec<&PhraseVector> = vectors.iter().collect();
    items.sort_by(|a, b| a.source_id.cmp(&b.source_id));
    for w in items.windows(2) {
        if w[0].source_id == w[1].source_id {
            return Err(ClusterError::DuplicateId(w[0].source_id.clone()));
        }
    }
    if let Some(bad) = items.iter().find(|p| p.v.len() != dim) {
        return Err(ClusterError::DimensionMismatch {
            id: bad.source_id.clone(),
            expected: dim,
            found: bad.v.len(),
        });
    }

    let n = items.len();
    let mut dist = DistanceMatrix::new(n);
    for i in 0..n {
        for j in i + 1..n {
            // dimensions were checked above
            let sim = cosine(&items[i].v, &items[j].v).unwrap_or(0.0);
            dist.set(i, j, 1.0 - sim);
        }
    }

    // Cluster i is represented by its smallest member index; items are
    // sorted by id, so index order is id order.
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active = vec![true; n];
    let mut nearest: Vec<Option<(f64, usize)>> = (0..n).map(|i| scan_nearest(&dist, &active, i)).collect();
    let merge_all = theta >= MAX_DISTANCE;

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            if let Some((d, j)) = nearest[i] {
                let cand = (d, i.min(j), i.max(j));
                if best.is_none_or(|b| better(cand, b)) {
                    best = Some(cand);
                }
            }
        }
        let Some((d, a, b)) = best else { break };
        if !(d < theta || merge_all) {
            break;
        }

        // merge b into a (a < b)
        let (na, nb) = (members[a].len() as f64, members[b].len() as f64);
        for k in (0..n).filter(|&k| active[k] && k != a && k != b) {
            let merged = (na * dist.get(a, k) + nb * dist.get(b, k)) / (na + nb);
            dist.set(a, k, merged);
        }
        let moved = core::mem::take(&mut members[b]);
        members[a].extend(moved);
        active[b] = false;
        nearest[b] = None;

        for k in (0..n).filter(|&k| active[k]) {
            let stale = k == a || matches!(nearest[k], Some((_, j)) if j == a || j == b);
            if stale {
                nearest[k] = scan_nearest(&dist, &active, k);
            } else if let Some((dk, jk)) = nearest[k] {
                let cand = dist.get(a, k);
                if better((cand, k.min(a), k.max(a)), (dk, k.min(jk), k.max(jk))) {
                    nearest[k] = Some((cand, a));
                }
            }
        }
    }

    let clusters = members
        .into_iter()
        .zip(&active)
        .filter(|(_, &on)| on)
        .map(|(m, _)| m.into_iter().map(|i| items[i].source_id.clone()).collect())
        .collect();
    let mut partition = Partition::from_clusters(clusters)?;
    partition.params = Some(ClusterParams {
        linkage: Linkage::Average,
        distance: Distance::Cosine,
        threshold: theta,
    });
    Ok(partition)
}

fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && (a.1, a.2) < (b.1, b.2))
}

fn scan_nearest(dist: &DistanceMatrix, active: &[bool], i: usize) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for j in (0..active.len()).filter(|&j| j != i && active[j]) {
        let d = dist.get(i, j);
        let replace = match best {
            None => true,
            Some((bd, bj)) => better((d, i.min(j), i.max(j)), (bd, i.min(bj), i.max(bj))),
        };
        if replace {
            best = Some((d, j));
        }
    }
    best
}

/// Condensed symmetric matrix without the diagonal.
struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    fn new(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n.saturating_sub(1) / 2],
        }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.index(i, j)]
    }

    fn set(&mut self, i: usize, j: usize, d: f64) {
        let k = self.index(i, j);
        self.data[k] = d;
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionRow {
    /// Index of the gold cluster.
    pub gold: usize,
    /// Overlap with each predicted cluster, in partition order.
    pub overlaps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionScore {
    pub purity: f64,
    pub adjusted_rand: f64,
    pub confusion: Vec<ConfusionRow>,
}

pub fn score(pred: &Partition, gold: &Partition) -> Result<PartitionScore, ClusterError> {
    if pred.ids() != gold.ids() {
        return Err(ClusterError::UniverseMismatch);
    }
    let n = pred.ids().len();
    let gold_of: BTreeMap<&str, usize> = gold
        .clusters
        .iter()
        .enumerate()
        .flat_map(|(g, c)| c.iter().map(move |id| (id.as_str(), g)))
        .collect();

    let mut table = vec![vec![0usize; pred.clusters.len()]; gold.clusters.len()];
    for (p, cluster) in pred.clusters.iter().enumerate() {
        for id in cluster {
            table[gold_of[id.as_str()]][p] += 1;
        }
    }

    let purity = if n == 0 {
        1.0
    } else {
        let hits: usize = (0..pred.clusters.len())
            .map(|p| table.iter().map(|row| row[p]).max().unwrap_or(0))
            .sum();
        hits as f64 / n as f64
    };

    let pairs = |x: usize| (x * x.saturating_sub(1) / 2) as f64;
    let index: f64 = table.iter().flatten().map(|&x| pairs(x)).sum();
    let sum_gold: f64 = gold.clusters.iter().map(|c| pairs(c.len())).sum();
    let sum_pred: f64 = pred.clusters.iter().map(|c| pairs(c.len())).sum();
    let total = pairs(n);
    let adjusted_rand = if total == 0.0 {
        1.0
    } else {
        let expected = sum_gold * sum_pred / total;
        let max_index = (sum_gold + sum_pred) / 2.0;
        if max_index == expected {
            // both partitions trivial (all singletons or one block)
            if pred.clusters.len() == gold.clusters.len() {
                1.0
            } else {
                0.0
            }
        } else {
            (index - expected) / (max_index - expected)
        }
    };

    let confusion = table
        .into_iter()
        .enumerate()
        .map(|(gold, overlaps)| ConfusionRow { gold, overlaps })
        .collect();
    Ok(PartitionScore {
        purity,
        adjusted_rand,
        confusion,
    })
}
