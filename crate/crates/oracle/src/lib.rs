//! Slow, obviously-correct reference implementations for cross-checking
//! `bitext-core` in tests.
//!
//! Everything here works from first principles on raw matrix data: full
//! similarity tables, full sorts, exhaustive sweeps. Nothing calls the
//! optimized library paths — only its data types — so agreement between the
//! two crates is meaningful evidence, not circularity. Favor obviousness
//! over speed when editing.

use std::collections::BTreeSet;

use bitext_core::embed_io::{Corpus, EmbeddingMatrix, GoldAlignment};
use bitext_core::margin::{MarginFunction, ScoringConfig};
use bitext_core::retrieval::RetrievalStrategy;
use bitext_core::simcore::DuplicateRule;

/// f64-accumulated dot product clamped to [-1, 1], matching the library's
/// definition of cosine over unit rows.
pub fn cos(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    dot.clamp(-1.0, 1.0)
}

/// The full queries × database similarity table.
pub fn cosine_table(queries: &EmbeddingMatrix, database: &EmbeddingMatrix) -> Vec<Vec<f64>> {
    (0..queries.rows())
        .map(|q| (0..database.rows()).map(|d| cos(queries.row(q), database.row(d))).collect())
        .collect()
}

/// Which database rows may appear as neighbors: drops excluded rows, then
/// every row that repeats an earlier row (by text or by bits, per the
/// rule), scanning all earlier rows pairwise.
pub fn eligible_rows(
    database: &EmbeddingMatrix,
    rule: DuplicateRule,
    db_corpus: Option<&Corpus>,
) -> Vec<bool> {
    let n = database.rows();
    let mut mask: Vec<bool> = (0..n).map(|i| !database.is_excluded(i)).collect();
    for (i, keep) in mask.iter_mut().enumerate() {
        if !*keep {
            continue;
        }
        let repeats_earlier = (0..i).any(|j| {
            if database.is_excluded(j) {
                return false;
            }
            match rule {
                DuplicateRule::None => false,
                DuplicateRule::ByVector => database.row(j) == database.row(i),
                DuplicateRule::ByText => {
                    let corpus = db_corpus.expect("by-text rule needs the database corpus");
                    corpus.sentence(j) == corpus.sentence(i)
                }
            }
        });
        if repeats_earlier {
            *keep = false;
        }
    }
    mask
}

/// k nearest neighbors by full sort: every eligible database row, ordered
/// by descending similarity with ties toward the lower index, truncated to
/// k. Excluded query rows get empty lists.
pub fn knn_naive(
    queries: &EmbeddingMatrix,
    database: &EmbeddingMatrix,
    k: usize,
    rule: DuplicateRule,
    db_corpus: Option<&Corpus>,
) -> Vec<Vec<(usize, f64)>> {
    let mask = eligible_rows(database, rule, db_corpus);
    (0..queries.rows())
        .map(|q| {
            if queries.is_excluded(q) {
                return Vec::new();
            }
            let mut sims: Vec<(usize, f64)> = mask
                .iter()
                .enumerate()
                .filter(|&(_, &ok)| ok)
                .map(|(d, _)| (d, cos(queries.row(q), database.row(d))))
                .collect();
            sims.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            sims.truncate(k);
            sims
        })
        .collect()
}

/// The margin definition, written out plainly.
pub fn margin(a: f64, b: f64, f: MarginFunction) -> f64 {
    match f {
        MarginFunction::Absolute => a,
        MarginFunction::Distance => a - b,
        MarginFunction::Ratio => {
            assert!(b != 0.0, "degenerate neighborhood");
            a / b
        }
    }
}

/// Everything needed to margin-score any (src, tgt) pair of one matrix
/// pair, computed once up front: the full similarity table and each row's
/// top-k neighborhood sum in both directions.
pub struct NaiveScorer {
    /// table[x][y] = cos(src x, tgt y)
    pub table: Vec<Vec<f64>>,
    pub src_neighbors: Vec<Vec<(usize, f64)>>,
    pub tgt_neighbors: Vec<Vec<(usize, f64)>>,
    src_sums: Vec<f64>,
    tgt_sums: Vec<f64>,
    tgt_eligible: Vec<bool>,
    src_excluded: Vec<bool>,
    tgt_excluded: Vec<bool>,
    k: usize,
    margin: MarginFunction,
}

impl NaiveScorer {
    pub fn new(
        src: &EmbeddingMatrix,
        tgt: &EmbeddingMatrix,
        cfg: &ScoringConfig,
        src_corpus: Option<&Corpus>,
        tgt_corpus: Option<&Corpus>,
    ) -> Self {
        let table = cosine_table(src, tgt);
        let src_neighbors = knn_naive(src, tgt, cfg.k, cfg.dup, tgt_corpus);
        let tgt_neighbors = knn_naive(tgt, src, cfg.k, cfg.dup, src_corpus);
        let sum = |lists: &Vec<Vec<(usize, f64)>>| -> Vec<f64> {
            lists.iter().map(|l| l.iter().map(|&(_, s)| s).sum()).collect()
        };
        Self {
            src_sums: sum(&src_neighbors),
            tgt_sums: sum(&tgt_neighbors),
            tgt_eligible: eligible_rows(tgt, cfg.dup, tgt_corpus),
            src_excluded: (0..src.rows()).map(|i| src.is_excluded(i)).collect(),
            tgt_excluded: (0..tgt.rows()).map(|i| tgt.is_excluded(i)).collect(),
            table,
            src_neighbors,
            tgt_neighbors,
            k: cfg.k,
            margin: cfg.margin,
        }
    }

    /// score(x, y) = margin(cos(x, y), sums over both neighborhoods / 2k).
    pub fn score(&self, x: usize, y: usize) -> f64 {
        let b = (self.src_sums[x] + self.tgt_sums[y]) / (2.0 * self.k as f64);
        margin(self.table[x][y], b, self.margin)
    }

    /// Forward retrieval: per non-excluded source, the best-scoring target
    /// among its k cosine-nearest (ties toward the lower target index).
    pub fn forward(&self) -> Vec<(usize, usize, f64)> {
        self.best_per_query(true, false)
    }

    /// Forward retrieval scoring every eligible target, not only the k
    /// nearest.
    pub fn forward_full(&self) -> Vec<(usize, usize, f64)> {
        self.best_per_query(true, true)
    }

    /// Backward retrieval: per non-excluded target, the best-scoring
    /// source. Triples stay (src, tgt, score).
    pub fn backward(&self) -> Vec<(usize, usize, f64)> {
        self.best_per_query(false, false)
    }

    fn best_per_query(&self, forward: bool, full: bool) -> Vec<(usize, usize, f64)> {
        let (n_queries, excluded, neighbors) = if forward {
            (self.table.len(), &self.src_excluded, &self.src_neighbors)
        } else {
            (self.table.first().map_or(0, Vec::len), &self.tgt_excluded, &self.tgt_neighbors)
        };
        let mut out = Vec::new();
        for q in 0..n_queries {
            if excluded[q] {
                continue;
            }
            let candidates: Vec<usize> = if full {
                if forward {
                    self.tgt_eligible.iter().enumerate().filter(|(_, &ok)| ok).map(|(d, _)| d).collect()
                } else {
                    // Backward full scan is not needed by any test; keep the
                    // oracle minimal.
                    unimplemented!("full-database backward oracle");
                }
            } else {
                neighbors[q].iter().map(|&(d, _)| d).collect()
            };
            let mut best: Option<(usize, f64)> = None;
            for d in candidates {
                let s = if forward { self.score(q, d) } else { self.score(d, q) };
                let better = match best {
                    None => true,
                    Some((bd, bs)) => s > bs || (s == bs && d < bd),
                };
                if better {
                    best = Some((d, s));
                }
            }
            if let Some((d, s)) = best {
                if forward {
                    out.push((q, d, s));
                } else {
                    out.push((d, q, s));
                }
            }
        }
        out
    }

    /// Pairs mined by both directions.
    pub fn intersection(&self) -> Vec<(usize, usize, f64)> {
        let bwd: BTreeSet<(usize, usize)> =
            self.backward().into_iter().map(|(s, t, _)| (s, t)).collect();
        self.forward().into_iter().filter(|&(s, t, _)| bwd.contains(&(s, t))).collect()
    }

    /// Union of both directions, then drop every pair sharing an endpoint
    /// with a strictly higher-scoring pair. Quadratic scan.
    pub fn max_score(&self) -> Vec<(usize, usize, f64)> {
        let mut union: Vec<(usize, usize, f64)> = Vec::new();
        for triple in self.forward().into_iter().chain(self.backward()) {
            if !union.iter().any(|&(s, t, _)| (s, t) == (triple.0, triple.1)) {
                union.push(triple);
            }
        }
        union.sort_by_key(|t| (t.0, t.1));
        union
            .iter()
            .filter(|&&(s, t, score)| {
                !union
                    .iter()
                    .any(|&(s2, t2, score2)| (s2 == s || t2 == t) && score2 > score)
            })
            .copied()
            .collect()
    }

    pub fn mine(&self, strategy: RetrievalStrategy) -> Vec<(usize, usize, f64)> {
        match strategy {
            RetrievalStrategy::Forward => self.forward(),
            RetrievalStrategy::Backward => self.backward(),
            RetrievalStrategy::Intersection => self.intersection(),
            RetrievalStrategy::MaxScore => self.max_score(),
        }
    }
}

/// Precision, recall, F1 straight from the definitions.
pub fn prf1_naive(predicted: &BTreeSet<(usize, usize)>, gold: &GoldAlignment) -> (f64, f64, f64) {
    assert!(!gold.is_empty(), "empty gold alignment");
    let tp = predicted.iter().filter(|&&(s, t)| gold.contains(s, t)).count() as f64;
    let p = if predicted.is_empty() { 0.0 } else { tp / predicted.len() as f64 };
    let r = tp / gold.len() as f64;
    let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f1)
}

/// Exhaustive threshold sweep: every distinct score is tried as the cut
/// "keep score >= t", F1 computed from scratch each time. Ties prefer the
/// larger threshold. Returns (threshold, f1).
pub fn best_f1_exhaustive(pairs: &[(usize, usize, f64)], gold: &GoldAlignment) -> (f64, f64) {
    assert!(!pairs.is_empty(), "empty candidate list");
    let mut thresholds: Vec<f64> = pairs.iter().map(|&(_, _, s)| s).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    let mut best: Option<(f64, f64)> = None;
    for &t in &thresholds {
        let predicted: BTreeSet<(usize, usize)> =
            pairs.iter().filter(|&&(_, _, s)| s >= t).map(|&(s, d, _)| (s, d)).collect();
        let (_, _, f1) = prf1_naive(&predicted, gold);
        let better = match best {
            None => true,
            Some((bt, bf)) => f1 > bf || (f1 == bf && t > bt),
        };
        if better {
            best = Some((t, f1));
        }
    }
    best.expect("at least one threshold")
}

/// Fraction of sources whose single pair is in the gold alignment.
pub fn precision_at_1_naive(pairs: &[(usize, usize, f64)], gold: &GoldAlignment) -> f64 {
    assert!(!pairs.is_empty(), "empty candidate list");
    let sources: BTreeSet<usize> = pairs.iter().map(|&(s, _, _)| s).collect();
    assert_eq!(sources.len(), pairs.len(), "duplicate source rows");
    let hits = pairs.iter().filter(|&&(s, t, _)| gold.contains(s, t)).count();
    hits as f64 / pairs.len() as f64
}
