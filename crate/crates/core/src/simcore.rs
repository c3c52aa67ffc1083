//! Exact cosine k-nearest-neighbor search over normalized embedding rows.
//!
//! The search is brute force: every query row is compared against every
//! eligible database row, accumulating dot products in f64 and clamping to
//! [-1, 1]. Queries are processed in blocks (default 16384 rows) purely to
//! bound scheduling granularity; each query's result depends only on its own
//! full database scan, so output is identical for any block size and any
//! rayon thread count. Ties on similarity are broken toward the lower
//! database index.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::embed_io::{Corpus, EmbeddingMatrix};
use crate::error::{Error, Result};

/// Query rows handled per scheduling block in [`knn`].
pub const DEFAULT_BLOCK_SIZE: usize = 16_384;

/// Which database rows count as duplicates of an earlier row and are
/// excluded from neighbor lists. The first occurrence always stays eligible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicateRule {
    /// No exclusion.
    None,
    /// Rows whose corpus sentence text equals an earlier row's text.
    ByText,
    /// Rows bitwise equal to an earlier row.
    ByVector,
}

impl DuplicateRule {
    /// Default rule: deduplicate by text when the database corpus is
    /// available, by vector otherwise.
    pub fn default_for(db_corpus: Option<&Corpus>) -> Self {
        if db_corpus.is_some() {
            DuplicateRule::ByText
        } else {
            DuplicateRule::ByVector
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub similarity: f64,
}

/// Nearest neighbors of one query row, ordered by descending similarity
/// (ties toward the lower index).
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: usize,
    pub neighbors: Vec<Neighbor>,
}

impl NeighborList {
    pub fn similarity_sum(&self) -> f64 {
        self.neighbors.iter().map(|n| n.similarity).sum()
    }
}

/// Cosine similarity of two unit vectors: the f64-accumulated dot product,
/// clamped to [-1, 1].
pub fn cosine(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimMismatch { left: a.len(), right: b.len() });
    }
    Ok(dot_clamped(a, b))
}

fn dot_clamped(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    dot.clamp(-1.0, 1.0)
}

/// Mean similarity of a neighbor list.
pub fn neighborhood_mean(list: &NeighborList) -> Result<f64> {
    if list.neighbors.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    Ok(list.similarity_sum() / list.neighbors.len() as f64)
}

/// Marks which database rows may appear as neighbors: excluded rows and
/// later duplicates (per `rule`) are masked out.
pub fn eligibility_mask(
    database: &EmbeddingMatrix,
    rule: DuplicateRule,
    db_corpus: Option<&Corpus>,
) -> Result<Vec<bool>> {
    let n = database.rows();
    let mut mask = vec![true; n];
    for &row in database.excluded_rows() {
        mask[row] = false;
    }
    match rule {
        DuplicateRule::None => {}
        DuplicateRule::ByVector => {
            let mut seen: HashMap<Vec<u32>, usize> = HashMap::with_capacity(n);
            for (i, keep) in mask.iter_mut().enumerate() {
                let key: Vec<u32> = database.row(i).iter().map(|v| v.to_bits()).collect();
                if seen.insert(key, i).is_some() {
                    *keep = false;
                }
            }
        }
        DuplicateRule::ByText => {
            let corpus = db_corpus.ok_or(Error::MissingCorpus)?;
            if corpus.len() != n {
                return Err(Error::RowCountMismatch {
                    what: "database corpus",
                    expected: n,
                    actual: corpus.len(),
                });
            }
            let mut seen: HashMap<&str, usize> = HashMap::with_capacity(n);
            for (i, keep) in mask.iter_mut().enumerate() {
                if seen.insert(corpus.sentence(i), i).is_some() {
                    *keep = false;
                }
            }
        }
    }
    Ok(mask)
}

/// Exact k-nearest-neighbor search of every query row against the database.
///
/// Returns one list per query, in query order. Lists may hold fewer than `k`
/// entries when the database is smaller than `k` after duplicate exclusion,
/// and are empty for queries excluded at load time.
pub fn knn(
    queries: &EmbeddingMatrix,
    database: &EmbeddingMatrix,
    k: usize,
    rule: DuplicateRule,
    db_corpus: Option<&Corpus>,
) -> Result<Vec<NeighborList>> {
    let all: Vec<usize> = (0..queries.rows()).collect();
    knn_for_queries(&all, queries, database, k, rule, db_corpus, DEFAULT_BLOCK_SIZE)
}

/// [`knn`] with an explicit scheduling block size. Results are identical for
/// every `block_size >= 1`.
pub fn knn_with_block_size(
    queries: &EmbeddingMatrix,
    database: &EmbeddingMatrix,
    k: usize,
    rule: DuplicateRule,
    db_corpus: Option<&Corpus>,
    block_size: usize,
) -> Result<Vec<NeighborList>> {
    let all: Vec<usize> = (0..queries.rows()).collect();
    knn_for_queries(&all, queries, database, k, rule, db_corpus, block_size)
}

/// k-nearest-neighbor search for an explicit subset of query rows. Output
/// parallels `query_rows`, with each list's `query` field set to the
/// original row index.
pub fn knn_for_queries(
    query_rows: &[usize],
    queries: &EmbeddingMatrix,
    database: &EmbeddingMatrix,
    k: usize,
    rule: DuplicateRule,
    db_corpus: Option<&Corpus>,
    block_size: usize,
) -> Result<Vec<NeighborList>> {
    if k < 1 {
        return Err(Error::InvalidK { k });
    }
    if block_size < 1 {
        return Err(Error::InvalidConfig("block size must be at least 1".into()));
    }
    if queries.dim() != database.dim() {
        return Err(Error::DimMismatch { left: queries.dim(), right: database.dim() });
    }
    if !queries.is_normalized() || !database.is_normalized() {
        return Err(Error::NotNormalized);
    }
    if let Some(&row) = query_rows.iter().find(|&&r| r >= queries.rows()) {
        return Err(Error::PairOutOfRange { side: "query", index: row, rows: queries.rows() });
    }
    let mask = eligibility_mask(database, rule, db_corpus)?;

    let mut out = Vec::with_capacity(query_rows.len());
    for block in query_rows.chunks(block_size) {
        let lists: Vec<NeighborList> = block
            .par_iter()
            .map(|&q| {
                if queries.is_excluded(q) {
                    return NeighborList { query: q, neighbors: Vec::new() };
                }
                let qrow = queries.row(q);
                let mut top = TopK::new(k);
                for (d, eligible) in mask.iter().enumerate() {
                    if *eligible {
                        top.push(d, dot_clamped(qrow, database.row(d)));
                    }
                }
                NeighborList { query: q, neighbors: top.into_sorted() }
            })
            .collect();
        out.extend(lists);
    }
    Ok(out)
}

/// Fixed-capacity top-k accumulator ordered by (similarity desc, index asc).
struct TopK {
    k: usize,
    entries: Vec<Neighbor>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self { k, entries: Vec::with_capacity(k + 1) }
    }

    fn push(&mut self, index: usize, similarity: f64) {
        if self.entries.len() == self.k {
            let worst = self.entries[self.k - 1];
            let better = similarity > worst.similarity
                || (similarity == worst.similarity && index < worst.index);
            if !better {
                return;
            }
        }
        let pos = self.entries.partition_point(|e| {
            e.similarity > similarity || (e.similarity == similarity && e.index < index)
        });
        self.entries.insert(pos, Neighbor { index, similarity });
        self.entries.truncate(self.k);
    }

    fn into_sorted(self) -> Vec<Neighbor> {
        self.entries
    }
}
