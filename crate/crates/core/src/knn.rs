//! Exact k-nearest-neighbor search over corpus embeddings.
//!
//! Search is a brute-force scan: corpora in this toolkit stay small
//! (<= 1e5 rows) and the tests demand exactness, so there is no point
//! in an approximate structure. Scores accumulate in f64 from the f32
//! inputs; ties break towards the lower corpus row index.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::tensor::TensorMatrix;

/// Similarity metric for neighbor search.
///
/// `SquaredL2` is a distance (smaller is better), `Cosine` a similarity
/// (larger is better). `NeighborSet` entries are always ordered best-first
/// under the owning metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    SquaredL2,
    Cosine,
}

impl Metric {
    /// Raw score between two vectors of equal dimension.
    pub fn score(self, a: &[f32], b: &[f32]) -> f64 {
        match self {
            Metric::SquaredL2 => squared_l2(a, b),
            Metric::Cosine => {
                let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
                for (&x, &y) in a.iter().zip(b) {
                    let (x, y) = (x as f64, y as f64);
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                dot / (na.sqrt() * nb.sqrt())
            }
        }
    }

    /// Best-first ordering: ascending for distances, descending for
    /// similarities, then ascending row index.
    fn better(self, a: (f64, usize), b: (f64, usize)) -> Ordering {
        let by_score = match self {
            Metric::SquaredL2 => a.0.partial_cmp(&b.0).unwrap(),
            Metric::Cosine => b.0.partial_cmp(&a.0).unwrap(),
        };
        by_score.then(a.1.cmp(&b.1))
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" | "squared_l2" => Ok(Metric::SquaredL2),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Argument(format!("unknown metric '{other}'"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::SquaredL2 => write!(f, "l2"),
            Metric::Cosine => write!(f, "cosine"),
        }
    }
}

fn squared_l2(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

/// One retrieved neighbor: corpus row index and its score under the
/// index metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub row: usize,
    pub score: f64,
}

/// Neighbors of one query, ordered best-first. Row indices are distinct
/// and the length is `min(k, candidate rows)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub entries: Vec<Neighbor>,
    pub k: usize,
}

impl NeighborSet {
    pub fn rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|n| n.row)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Immutable exact-search index over a copy of the corpus embeddings.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    metric: Metric,
    rows: usize,
    dim: usize,
    data: Vec<f32>,
    /// Per-row L2 norms, precomputed for cosine.
    norms: Vec<f64>,
    /// Rows with zero norm, excluded from cosine candidate sets.
    excluded: Vec<usize>,
}

impl KnnIndex {
    pub fn build(embeddings: &TensorMatrix, metric: Metric) -> Result<Self> {
        if embeddings.rows() == 0 {
            return Err(Error::Argument("cannot index an empty matrix".into()));
        }
        let rows = embeddings.rows();
        let dim = embeddings.cols();
        let mut norms = Vec::with_capacity(rows);
        let mut excluded = Vec::new();
        for r in 0..rows {
            let n = embeddings
                .row(r)
                .iter()
                .map(|&v| (v as f64) * (v as f64))
                .sum::<f64>()
                .sqrt();
            if metric == Metric::Cosine && n == 0.0 {
                excluded.push(r);
            }
            norms.push(n);
        }
        Ok(Self {
            metric,
            rows,
            dim,
            data: embeddings.data().to_vec(),
            norms,
            excluded,
        })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Zero-norm rows that cosine queries will never return.
    pub fn excluded_rows(&self) -> &[usize] {
        &self.excluded
    }

    fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    fn check_query(&self, q: &[f32]) -> Result<f64> {
        if q.len() != self.dim {
            return Err(Error::Argument(format!(
                "query dimension {} does not match index dimension {}",
                q.len(),
                self.dim
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("query contains non-finite values".into()));
        }
        let norm = q
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt();
        if self.metric == Metric::Cosine && norm == 0.0 {
            return Err(Error::Argument(
                "cosine similarity is undefined for the zero vector".into(),
            ));
        }
        Ok(norm)
    }

    fn score_row(&self, q: &[f32], q_norm: f64, r: usize) -> f64 {
        match self.metric {
            Metric::SquaredL2 => squared_l2(q, self.row(r)),
            Metric::Cosine => {
                let dot: f64 = q
                    .iter()
                    .zip(self.row(r))
                    .map(|(&x, &y)| x as f64 * y as f64)
                    .sum();
                dot / (q_norm * self.norms[r])
            }
        }
    }

    /// Exact k best rows for `q`. `exclude` drops one corpus row from the
    /// candidate set, for querying a training point against its own corpus.
    pub fn query(&self, q: &[f32], k: usize, exclude: Option<usize>) -> Result<NeighborSet> {
        if k == 0 {
            return Err(Error::Argument("k must be >= 1".into()));
        }
        let q_norm = self.check_query(q)?;
        let mut candidates: Vec<Neighbor> = (0..self.rows)
            .filter(|&r| Some(r) != exclude)
            .filter(|&r| !(self.metric == Metric::Cosine && self.norms[r] == 0.0))
            .map(|r| Neighbor {
                row: r,
                score: self.score_row(q, q_norm, r),
            })
            .collect();
        candidates.sort_unstable_by(|a, b| self.metric.better((a.score, a.row), (b.score, b.row)));
        candidates.truncate(k);
        Ok(NeighborSet {
            entries: candidates,
            k,
        })
    }

    /// Per-query k nearest, unioned by row id keeping each row's best
    /// score, then the k best of the union.
    pub fn query_union(&self, queries: &[Vec<f32>], k: usize) -> Result<NeighborSet> {
        if queries.is_empty() {
            return Err(Error::Argument("query_union needs at least one query".into()));
        }
        let mut best: Vec<Option<f64>> = vec![None; self.rows];
        for q in queries {
            for n in self.query(q, k, None)?.entries {
                let slot = &mut best[n.row];
                let keep = match *slot {
                    None => true,
                    Some(s) => self.metric.better((n.score, n.row), (s, n.row)) == Ordering::Less,
                };
                if keep {
                    *slot = Some(n.score);
                }
            }
        }
        let mut merged: Vec<Neighbor> = best
            .iter()
            .enumerate()
            .filter_map(|(row, s)| s.map(|score| Neighbor { row, score }))
            .collect();
        merged.sort_unstable_by(|a, b| self.metric.better((a.score, a.row), (b.score, b.row)));
        merged.truncate(k);
        Ok(NeighborSet { entries: merged, k })
    }
}
