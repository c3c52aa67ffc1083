//! Margin scoring of candidate sentence pairs.
//!
//! A pair (x, y) is scored by comparing its cosine `a = cos(x, y)` against
//! the average similarity of the two k-nearest-neighbor neighborhoods,
//!
//! ```text
//! b = (sum of cos(x, z) over z in NN_k(x) + sum of cos(y, z) over z in NN_k(y)) / (2k)
//! ```
//!
//! where `NN_k(x)` are x's nearest targets and `NN_k(y)` are y's nearest
//! sources. The divisor stays `2k` even when fewer than `k` neighbors exist
//! (the shortfall is logged). `y` itself may appear in `NN_k(x)`; only
//! duplicates are excluded, per the [`crate::simcore::DuplicateRule`].
//! Sentences whose neighborhoods run uniformly hot (hubs) receive a large
//! `b` and are discounted by the distance and ratio margins.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::embed_io::{Corpus, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::simcore::{self, cosine, DuplicateRule, NeighborList, DEFAULT_BLOCK_SIZE};

/// How the candidate cosine `a` is combined with the neighborhood mean `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginFunction {
    /// `a` alone: plain cosine, kept as the baseline.
    Absolute,
    /// `a - b`.
    Distance,
    /// `a / b`.
    Ratio,
}

impl fmt::Display for MarginFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarginFunction::Absolute => "absolute",
            MarginFunction::Distance => "distance",
            MarginFunction::Ratio => "ratio",
        })
    }
}

impl FromStr for MarginFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(MarginFunction::Absolute),
            "distance" => Ok(MarginFunction::Distance),
            "ratio" => Ok(MarginFunction::Ratio),
            other => Err(Error::InvalidConfig(format!(
                "unknown margin function {other:?} (expected absolute, distance, or ratio)"
            ))),
        }
    }
}

/// Neighborhood size, margin choice, and duplicate handling for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringConfig {
    pub k: usize,
    pub margin: MarginFunction,
    pub dup: DuplicateRule,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self { k: 4, margin: MarginFunction::Ratio, dup: DuplicateRule::ByVector }
    }
}

impl ScoringConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidK { k: self.k });
        }
        Ok(())
    }
}

/// Applies the margin function to a candidate cosine `a` and neighborhood
/// mean `b`. The ratio margin rejects `b == 0` and warns on negative `b`,
/// where the ratio ordering inverts.
pub fn margin_value(a: f64, b: f64, f: MarginFunction) -> Result<f64> {
    match f {
        MarginFunction::Absolute => Ok(a),
        MarginFunction::Distance => Ok(a - b),
        MarginFunction::Ratio => {
            if b == 0.0 {
                return Err(Error::DegenerateNeighborhood);
            }
            if b < 0.0 {
                log::warn!("ratio margin with negative neighborhood mean {b}");
            }
            Ok(a / b)
        }
    }
}

/// Scores one pair from its cosine and both precomputed neighbor lists.
/// `x_neighbors` are the nearest targets of the source, `y_neighbors` the
/// nearest sources of the target.
pub fn score_pair(
    cos_xy: f64,
    x_neighbors: &NeighborList,
    y_neighbors: &NeighborList,
    cfg: &ScoringConfig,
) -> Result<f64> {
    cfg.validate()?;
    for list in [x_neighbors, y_neighbors] {
        if list.neighbors.len() < cfg.k {
            log::warn!(
                "query {} has {} of {} requested neighbors; the {} divisor is kept",
                list.query,
                list.neighbors.len(),
                cfg.k,
                2 * cfg.k
            );
        }
    }
    score_from_sums(cos_xy, x_neighbors.similarity_sum(), y_neighbors.similarity_sum(), cfg)
}

/// Margin score from pre-accumulated neighborhood sums. The symmetric
/// `(sum_x + sum_y) / 2k` form makes the score identical whichever side is
/// treated as the query.
pub(crate) fn score_from_sums(
    cos_xy: f64,
    x_sum: f64,
    y_sum: f64,
    cfg: &ScoringConfig,
) -> Result<f64> {
    let b = (x_sum + y_sum) / (2.0 * cfg.k as f64);
    margin_value(cos_xy, b, cfg.margin)
}

/// Scores an explicit list of (source row, target row) pairs, computing the
/// needed neighbor lists internally. Equivalent to [`score_pair`] on each
/// pair; the whole list is one batch.
pub fn score_all(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    pairs: &[(usize, usize)],
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
) -> Result<Vec<f64>> {
    score_all_blocked(src, tgt, pairs, cfg, src_corpus, tgt_corpus, usize::MAX)
}

/// [`score_all`] over fixed-size blocks of the pair list. Each pair's score
/// depends only on global neighborhoods, so any `block_size >= 1` yields the
/// same scores as one shot; blocks only bound working memory.
pub fn score_all_blocked(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    pairs: &[(usize, usize)],
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
    block_size: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if block_size < 1 {
        return Err(Error::InvalidConfig("block size must be at least 1".into()));
    }
    for &(x, y) in pairs {
        if x >= src.rows() {
            return Err(Error::PairOutOfRange { side: "source", index: x, rows: src.rows() });
        }
        if y >= tgt.rows() {
            return Err(Error::PairOutOfRange { side: "target", index: y, rows: tgt.rows() });
        }
    }

    let mut scores = Vec::with_capacity(pairs.len());
    let mut start = 0;
    while start < pairs.len() {
        let end = start.saturating_add(block_size).min(pairs.len());
        let block = &pairs[start..end];

        let x_rows: Vec<usize> = block.iter().map(|&(x, _)| x).collect::<BTreeSet<_>>().into_iter().collect();
        let y_rows: Vec<usize> = block.iter().map(|&(_, y)| y).collect::<BTreeSet<_>>().into_iter().collect();
        let x_lists = simcore::knn_for_queries(&x_rows, src, tgt, cfg.k, cfg.dup, tgt_corpus, DEFAULT_BLOCK_SIZE)?;
        let y_lists = simcore::knn_for_queries(&y_rows, tgt, src, cfg.k, cfg.dup, src_corpus, DEFAULT_BLOCK_SIZE)?;
        let x_sum = |row: usize| x_lists[x_rows.binary_search(&row).unwrap()].similarity_sum();
        let y_sum = |row: usize| y_lists[y_rows.binary_search(&row).unwrap()].similarity_sum();

        let block_scores: Result<Vec<f64>> = block
            .par_iter()
            .map(|&(x, y)| {
                let a = cosine(src.row(x), tgt.row(y))?;
                score_from_sums(a, x_sum(x), y_sum(y), cfg)
            })
            .collect();
        scores.extend(block_scores?);
        start = end;
    }
    Ok(scores)
}
