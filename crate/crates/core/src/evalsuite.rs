//! Scoring mined pairs against a gold alignment: precision/recall/F1 over
//! exact pair matches, threshold optimization on a development set, and
//! precision-at-1 for corpus reconstruction.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::embed_io::GoldAlignment;
use crate::error::{Error, Result};
use crate::retrieval::{sort_by_score, CandidatePair};

/// Counts and derived rates for one evaluation run. `threshold` is set when
/// the report comes out of [`optimize_threshold`].
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
    pub threshold: Option<f64>,
}

impl EvalReport {
    fn from_counts(true_positives: usize, predicted: usize, gold: usize) -> Self {
        let precision = if predicted == 0 { 0.0 } else { true_positives as f64 / predicted as f64 };
        let recall = if gold == 0 { 0.0 } else { true_positives as f64 / gold as f64 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1, true_positives, predicted, gold, threshold: None }
    }

    /// Multi-line, aligned, human-readable rendering.
    pub fn human(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "precision       {:.6}", self.precision);
        let _ = writeln!(out, "recall          {:.6}", self.recall);
        let _ = writeln!(out, "f1              {:.6}", self.f1);
        match self.threshold {
            Some(t) => {
                let _ = writeln!(out, "threshold       {t:.6}");
            }
            None => {
                let _ = writeln!(out, "threshold       -");
            }
        }
        let _ = writeln!(out, "true positives  {}", self.true_positives);
        let _ = writeln!(out, "predicted       {}", self.predicted);
        let _ = write!(out, "gold            {}", self.gold);
        out
    }

    /// Single tab-separated record: precision, recall, F1, threshold (`-`
    /// when absent), true positives, predicted, gold.
    pub fn machine_line(&self) -> String {
        let threshold = match self.threshold {
            Some(t) => format!("{t:.6}"),
            None => "-".to_string(),
        };
        format!(
            "{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}",
            self.precision, self.recall, self.f1, threshold, self.true_positives, self.predicted, self.gold
        )
    }
}

/// Precision, recall, and F1 of a predicted pair set against the gold
/// alignment. Only exact (src, tgt) matches count. Precision of an empty
/// prediction is 0; an empty gold alignment is an error since recall is
/// undefined.
pub fn prf1(predicted: &BTreeSet<(usize, usize)>, gold: &GoldAlignment) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let tp = predicted.iter().filter(|&&(s, t)| gold.contains(s, t)).count();
    Ok(EvalReport::from_counts(tp, predicted.len(), gold.len()))
}

/// Sweeps score-descending prefixes of the candidate list and returns the
/// threshold maximizing F1, together with the report at that cut. Prefixes
/// are cut only between distinct score values, never inside a tie group;
/// equal F1 prefers the shorter prefix, i.e. the larger threshold. The
/// threshold is the score of the last kept pair. Duplicate (src, tgt)
/// entries collapse into their first (highest-scoring) occurrence.
///
/// An empty candidate list yields an absent threshold and an all-zero
/// report rather than an error.
pub fn optimize_threshold(
    pairs: &[CandidatePair],
    gold: &GoldAlignment,
) -> Result<(Option<f64>, EvalReport)> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    if pairs.is_empty() {
        return Ok((None, EvalReport::from_counts(0, 0, gold.len())));
    }

    let mut sorted = pairs.to_vec();
    sort_by_score(&mut sorted);

    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut tp = 0usize;
    let mut predicted = 0usize;
    let mut best: Option<(f64, usize, usize)> = None; // (threshold, tp, predicted)
    let mut best_f1 = f64::NEG_INFINITY;
    for (i, p) in sorted.iter().enumerate() {
        if seen.insert((p.src, p.tgt)) {
            predicted += 1;
            if gold.contains(p.src, p.tgt) {
                tp += 1;
            }
        }
        let boundary = match sorted.get(i + 1) {
            Some(next) => next.score != p.score,
            None => true,
        };
        if boundary {
            let report = EvalReport::from_counts(tp, predicted, gold.len());
            if report.f1 > best_f1 {
                best_f1 = report.f1;
                best = Some((p.score, tp, predicted));
            }
        }
    }

    let (threshold, tp, predicted) = best.expect("non-empty list has at least one boundary");
    let mut report = EvalReport::from_counts(tp, predicted, gold.len());
    report.threshold = Some(threshold);
    Ok((Some(threshold), report))
}

/// Fraction of sources whose single candidate pair is in the gold
/// alignment. The list must hold exactly one pair per source.
pub fn precision_at_1(candidates: &[CandidatePair], gold: &GoldAlignment) -> Result<f64> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut sources = BTreeSet::new();
    for p in candidates {
        if !sources.insert(p.src) {
            return Err(Error::DuplicateSource { src: p.src });
        }
    }
    let hits = candidates.iter().filter(|p| gold.contains(p.src, p.tgt)).count();
    Ok(hits as f64 / candidates.len() as f64)
}
