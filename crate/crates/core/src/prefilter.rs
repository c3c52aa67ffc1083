//! Cheap corpus cleaning ahead of embedding and scoring: exact-duplicate
//! removal plus per-pair rules on token counts, token overlap, length
//! ratio, and optional language tags.
//!
//! Rules run in a fixed order — duplicate, language, too short, too long,
//! overlap, length ratio — and the first violation supplies the rejection
//! reason, so per-reason statistics are deterministic.

use std::collections::HashSet;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Thresholds for [`rule_filter`]. Token = maximal non-whitespace run.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterRuleConfig {
    /// Reject pairs where either side has fewer tokens.
    pub min_tokens: usize,
    /// Reject pairs where either side has more tokens.
    pub max_tokens: usize,
    /// Reject pairs whose token-set overlap, measured against the smaller
    /// set, reaches this fraction.
    pub max_overlap: f64,
    /// Reject pairs whose longer side exceeds this multiple of the shorter
    /// side (token counts).
    pub max_len_ratio: f64,
    /// Expected (source, target) language codes, compared against per-pair
    /// sidecar tags when both are present.
    pub expected_langs: Option<(String, String)>,
}

impl Default for FilterRuleConfig {
    fn default() -> Self {
        Self {
            min_tokens: 3,
            max_tokens: 80,
            max_overlap: 0.5,
            max_len_ratio: 2.0,
            expected_langs: None,
        }
    }
}

impl FilterRuleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return Err(Error::InvalidConfig(format!(
                "token bounds must satisfy 0 < min <= max, got {}..{}",
                self.min_tokens, self.max_tokens
            )));
        }
        if !(self.max_overlap > 0.0 && self.max_overlap <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "max overlap must be in (0, 1], got {}",
                self.max_overlap
            )));
        }
        if self.max_len_ratio.is_nan() || self.max_len_ratio < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "max length ratio must be at least 1, got {}",
                self.max_len_ratio
            )));
        }
        Ok(())
    }
}

/// Why a pair was dropped, in rule-evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RejectReason {
    Duplicate,
    LangMismatch,
    TooShort,
    TooLong,
    Overlap,
    LengthRatio,
}

impl RejectReason {
    pub const ALL: [RejectReason; 6] = [
        RejectReason::Duplicate,
        RejectReason::LangMismatch,
        RejectReason::TooShort,
        RejectReason::TooLong,
        RejectReason::Overlap,
        RejectReason::LengthRatio,
    ];
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::Duplicate => "duplicate",
            RejectReason::LangMismatch => "lang_mismatch",
            RejectReason::TooShort => "too_short",
            RejectReason::TooLong => "too_long",
            RejectReason::Overlap => "overlap",
            RejectReason::LengthRatio => "length_ratio",
        })
    }
}

/// Keep the pair, or drop it for exactly one reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterDecision {
    Keep,
    Reject(RejectReason),
}

impl FilterDecision {
    pub fn keep(&self) -> bool {
        matches!(self, FilterDecision::Keep)
    }

    pub fn reason(&self) -> Option<RejectReason> {
        match self {
            FilterDecision::Keep => None,
            FilterDecision::Reject(r) => Some(*r),
        }
    }
}

/// Applies the stateless rules to one pair, in order: language tags, token
/// counts, token-set overlap, length ratio. Duplicate detection is separate
/// (see [`PairDeduper`]) since it needs cross-pair state. `cfg` must be
/// valid per [`FilterRuleConfig::validate`].
pub fn rule_filter(
    src: &str,
    tgt: &str,
    cfg: &FilterRuleConfig,
    tags: Option<(&str, &str)>,
) -> FilterDecision {
    if let (Some((want_src, want_tgt)), Some((got_src, got_tgt))) = (&cfg.expected_langs, tags) {
        if got_src != want_src || got_tgt != want_tgt {
            return FilterDecision::Reject(RejectReason::LangMismatch);
        }
    }

    let src_tokens: Vec<&str> = src.split_whitespace().collect();
    let tgt_tokens: Vec<&str> = tgt.split_whitespace().collect();
    if src_tokens.len() < cfg.min_tokens || tgt_tokens.len() < cfg.min_tokens {
        return FilterDecision::Reject(RejectReason::TooShort);
    }
    if src_tokens.len() > cfg.max_tokens || tgt_tokens.len() > cfg.max_tokens {
        return FilterDecision::Reject(RejectReason::TooLong);
    }

    let src_set: HashSet<&str> = src_tokens.iter().copied().collect();
    let tgt_set: HashSet<&str> = tgt_tokens.iter().copied().collect();
    let common = src_set.intersection(&tgt_set).count();
    let smaller = src_set.len().min(tgt_set.len());
    if common as f64 / smaller as f64 >= cfg.max_overlap {
        return FilterDecision::Reject(RejectReason::Overlap);
    }

    let longer = src_tokens.len().max(tgt_tokens.len());
    let shorter = src_tokens.len().min(tgt_tokens.len());
    if longer as f64 / shorter as f64 > cfg.max_len_ratio {
        return FilterDecision::Reject(RejectReason::LengthRatio);
    }

    FilterDecision::Keep
}

/// Remembers every (src, tgt) pair seen so far through a 128-bit fingerprint
/// — SHA-256 over the source bytes, a 0xFF separator (a byte no UTF-8 text
/// contains), and the target bytes, truncated to 16 bytes. Collisions are
/// possible in principle but negligible below ~2^64 pairs.
#[derive(Debug, Default)]
pub struct PairDeduper {
    seen: HashSet<u128>,
}

impl PairDeduper {
    pub fn new() -> Self {
        Self::default()
    }

    /// True the first time a pair is seen, false on repeats.
    pub fn is_new(&mut self, src: &str, tgt: &str) -> bool {
        self.seen.insert(fingerprint(src, tgt))
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

fn fingerprint(src: &str, tgt: &str) -> u128 {
    let mut hasher = Sha256::new();
    hasher.update(src.as_bytes());
    hasher.update([0xFF]);
    hasher.update(tgt.as_bytes());
    let digest = hasher.finalize();
    u128::from_le_bytes(digest[..16].try_into().expect("digest is at least 16 bytes"))
}

/// Drops repeated (src, tgt) pairs from a stream, keeping first occurrences
/// and the original order. Direction-sensitive: (a, b) and (b, a) are
/// distinct pairs.
pub fn dedup_pairs<S, I>(pairs: I) -> impl Iterator<Item = (S, S)>
where
    S: AsRef<str>,
    I: IntoIterator<Item = (S, S)>,
{
    let mut deduper = PairDeduper::new();
    pairs.into_iter().filter(move |(src, tgt)| deduper.is_new(src.as_ref(), tgt.as_ref()))
}

/// Kept count plus one rejection counter per rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterStats {
    pub kept: usize,
    rejected: [usize; RejectReason::ALL.len()],
}

impl FilterStats {
    fn record(&mut self, decision: FilterDecision) {
        match decision.reason() {
            None => self.kept += 1,
            Some(reason) => {
                let slot = RejectReason::ALL.iter().position(|r| *r == reason);
                self.rejected[slot.expect("every reason is listed")] += 1;
            }
        }
    }

    pub fn count(&self, reason: RejectReason) -> usize {
        let slot = RejectReason::ALL.iter().position(|r| *r == reason);
        self.rejected[slot.expect("every reason is listed")]
    }

    pub fn total_rejected(&self) -> usize {
        self.rejected.iter().sum()
    }

    pub fn total(&self) -> usize {
        self.kept + self.total_rejected()
    }

    /// One `reason<TAB>count` line per rule, in rule order, each
    /// newline-terminated. Zero counts are included so the shape is fixed.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for reason in RejectReason::ALL {
            out.push_str(&format!("{reason}\t{}\n", self.count(reason)));
        }
        out
    }
}

/// Stateful driver combining deduplication, the rule filter, and statistics.
/// Feed pairs in corpus order; each call says whether to keep the pair.
#[derive(Debug)]
pub struct Prefilter {
    cfg: FilterRuleConfig,
    deduper: PairDeduper,
    stats: FilterStats,
}

impl Prefilter {
    pub fn new(cfg: FilterRuleConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, deduper: PairDeduper::new(), stats: FilterStats::default() })
    }

    pub fn process(&mut self, src: &str, tgt: &str, tags: Option<(&str, &str)>) -> FilterDecision {
        let decision = if !self.deduper.is_new(src, tgt) {
            FilterDecision::Reject(RejectReason::Duplicate)
        } else {
            rule_filter(src, tgt, &self.cfg, tags)
        };
        self.stats.record(decision);
        decision
    }

    pub fn stats(&self) -> &FilterStats {
        &self.stats
    }

    pub fn into_stats(self) -> FilterStats {
        self.stats
    }
}

/// Runs the whole pipeline over an in-memory pair list. `tags`, when given,
/// must align one-to-one with `pairs`. Returns the kept pairs in input
/// order and the statistics; kept + Σ rejections always equals the input
/// count.
pub fn prefilter_corpus<S: AsRef<str>>(
    pairs: &[(S, S)],
    cfg: &FilterRuleConfig,
    tags: Option<&[(S, S)]>,
) -> Result<(Vec<(String, String)>, FilterStats)> {
    if let Some(tags) = tags {
        if tags.len() != pairs.len() {
            return Err(Error::RowCountMismatch {
                what: "language tag lines",
                expected: pairs.len(),
                actual: tags.len(),
            });
        }
    }
    let mut filter = Prefilter::new(cfg.clone())?;
    let mut kept = Vec::new();
    for (i, (src, tgt)) in pairs.iter().enumerate() {
        let tag = tags.map(|t| (t[i].0.as_ref(), t[i].1.as_ref()));
        if filter.process(src.as_ref(), tgt.as_ref(), tag).keep() {
            kept.push((src.as_ref().to_string(), tgt.as_ref().to_string()));
        }
    }
    Ok((kept, filter.into_stats()))
}
