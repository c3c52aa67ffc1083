//! Candidate pair generation and filtering.
//!
//! Forward retrieval aligns each source sentence with its single best
//! margin-scored target; backward mirrors the directions. The two one-way
//! lists combine either by intersection (keep consistent alignments) or by
//! max-score (union, then drop pairs dominated at an endpoint). Mined pairs
//! are finally sorted by score and cut by threshold and/or size.
//!
//! Scoring a pair only re-ranks a small candidate set: by default the k
//! cosine-nearest neighbors found by [`crate::simcore::knn`]. The exhaustive
//! alternative ([`SearchSpace::FullDatabase`]) scores every eligible
//! database row and exists for cross-checking the shortcut.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::embed_io::{Corpus, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::margin::{score_from_sums, ScoringConfig};
use crate::simcore::{self, cosine, NeighborList};

/// How the two one-way candidate lists are turned into the final list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrievalStrategy {
    Forward,
    Backward,
    Intersection,
    MaxScore,
}

impl fmt::Display for RetrievalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RetrievalStrategy::Forward => "forward",
            RetrievalStrategy::Backward => "backward",
            RetrievalStrategy::Intersection => "intersection",
            RetrievalStrategy::MaxScore => "max-score",
        })
    }
}

impl FromStr for RetrievalStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(RetrievalStrategy::Forward),
            "backward" => Ok(RetrievalStrategy::Backward),
            "intersection" => Ok(RetrievalStrategy::Intersection),
            "max-score" | "max_score" => Ok(RetrievalStrategy::MaxScore),
            other => Err(Error::InvalidConfig(format!(
                "unknown strategy {other:?} (expected forward, backward, intersection, or max-score)"
            ))),
        }
    }
}

/// Which direction(s) produced a candidate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Fwd,
    Bwd,
    Both,
}

/// One mined pair: row indices into the source and target matrices plus the
/// margin score under the mining [`ScoringConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidatePair {
    pub src: usize,
    pub tgt: usize,
    pub score: f64,
    pub origin: Origin,
}

impl CandidatePair {
    /// The (src, tgt) index pair, the identity used by merges and gold sets.
    pub fn key(&self) -> (usize, usize) {
        (self.src, self.tgt)
    }
}

/// Candidate set scored per query: the k cosine-nearest rows (the fast
/// path), or every eligible database row (the oracle path).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchSpace {
    NearestK,
    FullDatabase,
}

/// Score threshold and/or maximum list size for [`filter_candidates`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterConfig {
    pub threshold: Option<f64>,
    pub top_n: Option<usize>,
}

/// Both kNN passes for one (src, tgt) matrix pair: each side's neighbor
/// lists over the other side, reused by every strategy.
struct MiningContext {
    fwd_lists: Vec<NeighborList>,
    bwd_lists: Vec<NeighborList>,
    src_sums: Vec<f64>,
    tgt_sums: Vec<f64>,
}

fn mining_context(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
    block_size: usize,
) -> Result<MiningContext> {
    cfg.validate()?;
    if src.rows() == 0 || tgt.rows() == 0 {
        return Err(Error::EmptyDatabase);
    }
    let fwd_lists = simcore::knn_with_block_size(src, tgt, cfg.k, cfg.dup, tgt_corpus, block_size)?;
    let bwd_lists = simcore::knn_with_block_size(tgt, src, cfg.k, cfg.dup, src_corpus, block_size)?;
    let src_sums = fwd_lists.iter().map(NeighborList::similarity_sum).collect();
    let tgt_sums = bwd_lists.iter().map(NeighborList::similarity_sum).collect();
    Ok(MiningContext { fwd_lists, bwd_lists, src_sums, tgt_sums })
}

/// One pass of best-match retrieval: for each non-excluded query row, score
/// the candidate set against the database and keep the top pair (ties to
/// the lower database index). Returns (query row, database row, score).
#[allow(clippy::too_many_arguments)]
fn best_matches(
    space: SearchSpace,
    queries: &EmbeddingMatrix,
    database: &EmbeddingMatrix,
    query_lists: &[NeighborList],
    query_sums: &[f64],
    db_sums: &[f64],
    cfg: &ScoringConfig,
    db_corpus: Option<&Corpus>,
) -> Result<Vec<(usize, usize, f64)>> {
    let full_mask = match space {
        SearchSpace::NearestK => None,
        SearchSpace::FullDatabase => Some(simcore::eligibility_mask(database, cfg.dup, db_corpus)?),
    };

    let picked: Result<Vec<Option<(usize, usize, f64)>>> = query_lists
        .par_iter()
        .enumerate()
        .map(|(q, list)| {
            if queries.is_excluded(q) {
                return Ok(None);
            }
            let candidates: Vec<(usize, f64)> = match &full_mask {
                None => list.neighbors.iter().map(|n| (n.index, n.similarity)).collect(),
                Some(mask) => {
                    let mut v = Vec::new();
                    for (row, &ok) in mask.iter().enumerate() {
                        if ok {
                            v.push((row, cosine(queries.row(q), database.row(row))?));
                        }
                    }
                    v
                }
            };
            if candidates.is_empty() {
                return Err(Error::EmptyNeighborhood);
            }
            let mut best: Option<(usize, f64)> = None;
            for (row, a) in candidates {
                let score = score_from_sums(a, query_sums[q], db_sums[row], cfg)?;
                let replace = match best {
                    None => true,
                    Some((b_row, b_score)) => {
                        score > b_score || (score == b_score && row < b_row)
                    }
                };
                if replace {
                    best = Some((row, score));
                }
            }
            let (row, score) = best.expect("candidate list is non-empty");
            Ok(Some((q, row, score)))
        })
        .collect();
    Ok(picked?.into_iter().flatten().collect())
}

/// Aligns each source sentence with its best-scoring target among the
/// source's k cosine-nearest neighbors. One pair per non-excluded source
/// row, in ascending source order.
pub fn forward_candidates(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
) -> Result<Vec<CandidatePair>> {
    forward_candidates_in(SearchSpace::NearestK, src, tgt, cfg, src_corpus, tgt_corpus)
}

/// [`forward_candidates`] with an explicit candidate search space.
pub fn forward_candidates_in(
    space: SearchSpace,
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
) -> Result<Vec<CandidatePair>> {
    let ctx = mining_context(src, tgt, cfg, src_corpus, tgt_corpus, simcore::DEFAULT_BLOCK_SIZE)?;
    forward_from_context(space, src, tgt, &ctx, cfg, tgt_corpus)
}

fn forward_from_context(
    space: SearchSpace,
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    ctx: &MiningContext,
    cfg: &ScoringConfig,
    tgt_corpus: Option<&Corpus>,
) -> Result<Vec<CandidatePair>> {
    let triples = best_matches(
        space,
        src,
        tgt,
        &ctx.fwd_lists,
        &ctx.src_sums,
        &ctx.tgt_sums,
        cfg,
        tgt_corpus,
    )?;
    Ok(triples
        .into_iter()
        .map(|(q, row, score)| CandidatePair { src: q, tgt: row, score, origin: Origin::Fwd })
        .collect())
}

/// Mirror of [`forward_candidates`]: one pair per non-excluded target row,
/// in ascending target order, each aligned with its best-scoring source.
pub fn backward_candidates(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
) -> Result<Vec<CandidatePair>> {
    backward_candidates_in(SearchSpace::NearestK, src, tgt, cfg, src_corpus, tgt_corpus)
}

/// [`backward_candidates`] with an explicit candidate search space.
pub fn backward_candidates_in(
    space: SearchSpace,
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
) -> Result<Vec<CandidatePair>> {
    let ctx = mining_context(src, tgt, cfg, src_corpus, tgt_corpus, simcore::DEFAULT_BLOCK_SIZE)?;
    backward_from_context(space, src, tgt, &ctx, cfg, src_corpus)
}

fn backward_from_context(
    space: SearchSpace,
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    ctx: &MiningContext,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
) -> Result<Vec<CandidatePair>> {
    let triples = best_matches(
        space,
        tgt,
        src,
        &ctx.bwd_lists,
        &ctx.tgt_sums,
        &ctx.src_sums,
        cfg,
        src_corpus,
    )?;
    Ok(triples
        .into_iter()
        .map(|(q, row, score)| CandidatePair { src: row, tgt: q, score, origin: Origin::Bwd })
        .collect())
}

/// Merges the two one-way lists according to `strategy`. Forward and
/// backward pass their list through; intersection keeps pairs present in
/// both (origin becomes [`Origin::Both`]); max-score unions the lists,
/// merges exact duplicates, and drops every pair that shares a source or
/// target with a strictly higher-scoring pair. Score ties keep both pairs.
/// Combined output is ordered by (src, tgt).
///
/// Both lists must come from the same [`ScoringConfig`]; a pair mined in
/// both directions then carries bitwise-identical scores, because the score
/// is symmetric in its two neighborhood sums.
pub fn combine(
    fwd: &[CandidatePair],
    bwd: &[CandidatePair],
    strategy: RetrievalStrategy,
) -> Vec<CandidatePair> {
    match strategy {
        RetrievalStrategy::Forward => fwd.to_vec(),
        RetrievalStrategy::Backward => bwd.to_vec(),
        RetrievalStrategy::Intersection => {
            let bwd_scores: BTreeMap<(usize, usize), f64> =
                bwd.iter().map(|p| (p.key(), p.score)).collect();
            fwd.iter()
                .filter(|p| {
                    if let Some(&s) = bwd_scores.get(&p.key()) {
                        debug_assert_eq!(s.to_bits(), p.score.to_bits());
                        true
                    } else {
                        false
                    }
                })
                .map(|p| CandidatePair { origin: Origin::Both, ..*p })
                .collect()
        }
        RetrievalStrategy::MaxScore => {
            let mut union: BTreeMap<(usize, usize), CandidatePair> = BTreeMap::new();
            for p in fwd.iter().chain(bwd) {
                union
                    .entry(p.key())
                    .and_modify(|existing| {
                        debug_assert_eq!(existing.score.to_bits(), p.score.to_bits());
                        if existing.origin != p.origin {
                            existing.origin = Origin::Both;
                        }
                    })
                    .or_insert(*p);
            }
            let mut max_src: BTreeMap<usize, f64> = BTreeMap::new();
            let mut max_tgt: BTreeMap<usize, f64> = BTreeMap::new();
            for p in union.values() {
                let s = max_src.entry(p.src).or_insert(f64::NEG_INFINITY);
                *s = s.max(p.score);
                let t = max_tgt.entry(p.tgt).or_insert(f64::NEG_INFINITY);
                *t = t.max(p.score);
            }
            union
                .into_values()
                .filter(|p| p.score >= max_src[&p.src] && p.score >= max_tgt[&p.tgt])
                .collect()
        }
    }
}

/// Runs the full mining pipeline for one strategy. The two kNN passes are
/// computed once and shared between the forward and backward halves.
pub fn mine_candidates(
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    strategy: RetrievalStrategy,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
) -> Result<Vec<CandidatePair>> {
    mine_candidates_in(
        SearchSpace::NearestK,
        src,
        tgt,
        strategy,
        cfg,
        src_corpus,
        tgt_corpus,
        simcore::DEFAULT_BLOCK_SIZE,
    )
}

/// [`mine_candidates`] with an explicit candidate search space and kNN
/// block size. The block size trades memory for speed and never changes
/// the result.
#[allow(clippy::too_many_arguments)]
pub fn mine_candidates_in(
    space: SearchSpace,
    src: &EmbeddingMatrix,
    tgt: &EmbeddingMatrix,
    strategy: RetrievalStrategy,
    cfg: &ScoringConfig,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
    block_size: usize,
) -> Result<Vec<CandidatePair>> {
    let ctx = mining_context(src, tgt, cfg, src_corpus, tgt_corpus, block_size)?;
    let fwd = match strategy {
        RetrievalStrategy::Backward => Vec::new(),
        _ => forward_from_context(space, src, tgt, &ctx, cfg, tgt_corpus)?,
    };
    let bwd = match strategy {
        RetrievalStrategy::Forward => Vec::new(),
        _ => backward_from_context(space, src, tgt, &ctx, cfg, src_corpus)?,
    };
    Ok(combine(&fwd, &bwd, strategy))
}

/// Sorts descending by score, ties broken by ascending (src, tgt).
pub fn sort_by_score(pairs: &mut [CandidatePair]) {
    pairs.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.key().cmp(&b.key())));
}

/// Sorts the pairs by descending score and keeps those at or above the
/// threshold, then the first `top_n`. At least one of the two cuts must be
/// configured.
pub fn filter_candidates(pairs: &[CandidatePair], f: &FilterConfig) -> Result<Vec<CandidatePair>> {
    if f.threshold.is_none() && f.top_n.is_none() {
        return Err(Error::EmptyFilterConfig);
    }
    let mut sorted = pairs.to_vec();
    sort_by_score(&mut sorted);
    if let Some(t) = f.threshold {
        sorted.retain(|p| p.score >= t);
    }
    if let Some(n) = f.top_n {
        sorted.truncate(n);
    }
    Ok(sorted)
}
