//! Cross-checks of the optimized library against the naive reference
//! implementations in `bitext-oracle`, plus frozen golden values computed
//! by the oracle (regenerate with
//! `cargo test -p bitext-core --test oracle_checks -- --ignored --nocapture`).

use std::collections::BTreeSet;

use bitext_core::embed_io::{normalize_rows, Corpus, EmbeddingMatrix, GoldAlignment};
use bitext_core::evalsuite;
use bitext_core::margin::{self, MarginFunction, ScoringConfig};
use bitext_core::retrieval::{self, CandidatePair, RetrievalStrategy, SearchSpace};
use bitext_core::simcore::{self, DuplicateRule};
use bitext_core::synthgen::{self, SynthConfig};
use bitext_oracle as oracle;

fn fixture(cfg: &SynthConfig) -> (EmbeddingMatrix, EmbeddingMatrix, GoldAlignment) {
    synthgen::generate(cfg).expect("valid config")
}

fn scoring(k: usize, margin: MarginFunction) -> ScoringConfig {
    ScoringConfig { k, margin, dup: DuplicateRule::ByVector }
}

/// A spread of small generated matrix pairs with varying shapes and noise.
fn seeded_cases() -> Vec<(EmbeddingMatrix, EmbeddingMatrix, usize)> {
    let mut cases = Vec::new();
    for seed in 0..40u64 {
        let cfg = SynthConfig {
            n_pairs: 4 + (seed as usize * 7) % 40,
            n_distractors: (seed as usize * 3) % 12,
            dim: 2 + (seed as usize % 14),
            noise: 0.2 + 0.1 * (seed % 7) as f64,
            n_hubs: seed as usize % 4,
            hub_strength: 0.6,
            seed,
        };
        let (src, tgt, _) = fixture(&cfg);
        let k = 1 + (seed as usize % 5);
        cases.push((src, tgt, k));
    }
    cases
}

fn triples(pairs: &[CandidatePair]) -> Vec<(usize, usize, f64)> {
    pairs.iter().map(|p| (p.src, p.tgt, p.score)).collect()
}

fn assert_triples_close(got: &[(usize, usize, f64)], want: &[(usize, usize, f64)], tol: f64, what: &str) {
    assert_eq!(got.len(), want.len(), "{what}: lengths differ");
    let mut got_sorted = got.to_vec();
    let mut want_sorted = want.to_vec();
    got_sorted.sort_by_key(|t| (t.0, t.1));
    want_sorted.sort_by_key(|t| (t.0, t.1));
    for (g, w) in got_sorted.iter().zip(&want_sorted) {
        assert_eq!((g.0, g.1), (w.0, w.1), "{what}: pair mismatch");
        assert!((g.2 - w.2).abs() <= tol, "{what}: score {} vs {}", g.2, w.2);
    }
}

#[test]
fn knn_matches_the_naive_oracle_across_seeded_cases() {
    for (i, (src, tgt, k)) in seeded_cases().iter().enumerate() {
        let fast = simcore::knn(src, tgt, *k, DuplicateRule::ByVector, None).unwrap();
        let naive = oracle::knn_naive(src, tgt, *k, DuplicateRule::ByVector, None);
        assert_eq!(fast.len(), naive.len());
        for (list, want) in fast.iter().zip(&naive) {
            let got: Vec<usize> = list.neighbors.iter().map(|n| n.index).collect();
            let want_idx: Vec<usize> = want.iter().map(|&(d, _)| d).collect();
            assert_eq!(got, want_idx, "case {i}: neighbor indices");
            for (n, &(_, sim)) in list.neighbors.iter().zip(want) {
                assert!((n.similarity - sim).abs() < 1e-6, "case {i}: similarity");
            }
        }
    }
}

#[test]
fn duplicate_masks_match_the_naive_scan() {
    // Bitwise-duplicate rows and repeated sentences, including an excluded
    // zero row handled upstream of both implementations.
    let m = normalize_rows(
        EmbeddingMatrix::from_vec(
            vec![1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.5, 0.5, 0.0, 1.0],
            2,
        )
        .unwrap(),
    )
    .unwrap();
    let corpus = Corpus::from_sentences(
        ["a", "b", "c", "b", "e"].iter().map(|s| s.to_string()).collect(),
    );
    for rule in [DuplicateRule::None, DuplicateRule::ByVector] {
        let fast = simcore::eligibility_mask(&m, rule, None).unwrap();
        let naive = oracle::eligible_rows(&m, rule, None);
        assert_eq!(fast, naive, "{rule:?}");
    }
    let fast = simcore::eligibility_mask(&m, DuplicateRule::ByText, Some(&corpus)).unwrap();
    let naive = oracle::eligible_rows(&m, DuplicateRule::ByText, Some(&corpus));
    assert_eq!(fast, naive);
    // Row 3 repeats the sentence "b"; the bitwise duplicate at row 2 stays.
    assert_eq!(naive, vec![true, true, true, false, true]);
}

#[test]
fn every_strategy_matches_the_naive_miner() {
    let configs = [
        SynthConfig { n_pairs: 60, n_distractors: 8, dim: 12, noise: 0.5, n_hubs: 4, hub_strength: 0.9, seed: 3 },
        SynthConfig { n_pairs: 90, n_distractors: 0, dim: 8, noise: 0.9, n_hubs: 6, hub_strength: 0.8, seed: 11 },
        SynthConfig { n_pairs: 40, n_distractors: 15, dim: 24, noise: 0.3, n_hubs: 0, hub_strength: 0.0, seed: 27 },
    ];
    for cfg in &configs {
        let (src, tgt, _) = fixture(cfg);
        for margin_fn in [MarginFunction::Absolute, MarginFunction::Distance, MarginFunction::Ratio] {
            let sc = scoring(4, margin_fn);
            let naive = oracle::NaiveScorer::new(&src, &tgt, &sc, None, None);
            for strategy in [
                RetrievalStrategy::Forward,
                RetrievalStrategy::Backward,
                RetrievalStrategy::Intersection,
                RetrievalStrategy::MaxScore,
            ] {
                let fast = retrieval::mine_candidates(&src, &tgt, strategy, &sc, None, None).unwrap();
                let want = naive.mine(strategy);
                assert_triples_close(
                    &triples(&fast),
                    &want,
                    1e-9,
                    &format!("seed {} {margin_fn} {strategy}", cfg.seed),
                );
            }
        }
    }
}

#[test]
fn full_database_retrieval_matches_the_naive_full_scan() {
    let cfg = SynthConfig { n_pairs: 50, n_distractors: 10, dim: 10, noise: 0.7, n_hubs: 5, hub_strength: 0.9, seed: 9 };
    let (src, tgt, _) = fixture(&cfg);
    let sc = scoring(4, MarginFunction::Ratio);
    let fast =
        retrieval::forward_candidates_in(SearchSpace::FullDatabase, &src, &tgt, &sc, None, None).unwrap();
    let naive = oracle::NaiveScorer::new(&src, &tgt, &sc, None, None);
    assert_triples_close(&triples(&fast), &naive.forward_full(), 1e-9, "full database");
}

#[test]
fn batch_scoring_matches_the_oracle_formula() {
    let cfg = SynthConfig { n_pairs: 80, n_distractors: 10, dim: 16, noise: 0.6, n_hubs: 5, hub_strength: 0.85, seed: 42 };
    let (src, tgt, _) = fixture(&cfg);
    let sc = scoring(4, MarginFunction::Ratio);
    let naive = oracle::NaiveScorer::new(&src, &tgt, &sc, None, None);
    // Score the forward nearest-neighbor pairs, the natural batch.
    let pairs: Vec<(usize, usize)> =
        naive.forward().iter().map(|&(s, t, _)| (s, t)).collect();
    let scores = margin::score_all(&src, &tgt, &pairs, &sc, None, None).unwrap();
    for (&(x, y), got) in pairs.iter().zip(&scores) {
        let want = naive.score(x, y);
        assert!((got - want).abs() < 1e-6, "pair ({x}, {y}): {got} vs {want}");
    }
}

#[test]
fn threshold_optimizer_agrees_with_the_exhaustive_sweep() {
    for seed in 0..30u64 {
        let cfg = SynthConfig {
            n_pairs: 30 + (seed as usize % 5) * 25,
            n_distractors: (seed as usize % 3) * 10,
            dim: 6 + (seed as usize % 10),
            noise: 0.4 + 0.15 * (seed % 4) as f64,
            n_hubs: seed as usize % 6,
            hub_strength: 0.9,
            seed,
        };
        let (src, tgt, gold) = fixture(&cfg);
        let margin_fn = [MarginFunction::Absolute, MarginFunction::Distance, MarginFunction::Ratio]
            [seed as usize % 3];
        let strategy = [
            RetrievalStrategy::Forward,
            RetrievalStrategy::Backward,
            RetrievalStrategy::Intersection,
            RetrievalStrategy::MaxScore,
        ][seed as usize % 4];
        let sc = scoring(4, margin_fn);
        let mined = retrieval::mine_candidates(&src, &tgt, strategy, &sc, None, None).unwrap();
        if mined.is_empty() {
            continue;
        }
        let (threshold, report) = evalsuite::optimize_threshold(&mined, &gold).unwrap();
        let (want_t, want_f1) = oracle::best_f1_exhaustive(&triples(&mined), &gold);
        assert_eq!(report.f1, want_f1, "seed {seed}: best F1");
        assert_eq!(threshold, Some(want_t), "seed {seed}: threshold");
    }
}

#[test]
fn reconstruction_metric_agrees_with_the_oracle() {
    let cfg = SynthConfig { n_pairs: 120, n_distractors: 0, dim: 10, noise: 0.6, n_hubs: 8, hub_strength: 0.9, seed: 7 };
    let (src, tgt, gold) = fixture(&cfg);
    let sc = scoring(4, MarginFunction::Ratio);
    let fwd = retrieval::forward_candidates(&src, &tgt, &sc, None, None).unwrap();
    let got = evalsuite::precision_at_1(&fwd, &gold).unwrap();
    let naive = oracle::NaiveScorer::new(&src, &tgt, &sc, None, None);
    let want = oracle::precision_at_1_naive(&naive.forward(), &gold);
    assert_eq!(got, want);
    assert!(got < 1.0, "the noisy fixture should not reconstruct perfectly (got {got})");
    assert!(got > 0.5, "the noisy fixture should mostly reconstruct (got {got})");
}

#[test]
fn report_counts_agree_with_the_oracle_rates() {
    let cfg = SynthConfig { n_pairs: 70, n_distractors: 12, dim: 9, noise: 0.8, n_hubs: 4, hub_strength: 0.9, seed: 19 };
    let (src, tgt, gold) = fixture(&cfg);
    let sc = scoring(4, MarginFunction::Distance);
    let mined =
        retrieval::mine_candidates(&src, &tgt, RetrievalStrategy::MaxScore, &sc, None, None).unwrap();
    let predicted: BTreeSet<(usize, usize)> = mined.iter().map(|p| (p.src, p.tgt)).collect();
    let report = evalsuite::prf1(&predicted, &gold).unwrap();
    let (p, r, f1) = oracle::prf1_naive(&predicted, &gold);
    assert_eq!(report.precision, p);
    assert_eq!(report.recall, r);
    assert_eq!(report.f1, f1);
}

/// Frozen golden values, computed by the naive oracle before the optimized
/// paths existed (see `regenerate_golden_values`). The fixture: 4 planted
/// pairs, dim 4, noise 0.5, no hubs, seed 42; pair (0, 0) scored with k=2
/// under the ratio margin.
const GOLDEN_4X4_PAIR00_COSINE: f64 = 0.8751398901240393;
const GOLDEN_4X4_PAIR00_K2_RATIO: f64 = 1.3193779146266658;

fn small_fixture_config() -> SynthConfig {
    SynthConfig { n_pairs: 4, n_distractors: 0, dim: 4, noise: 0.5, n_hubs: 0, hub_strength: 0.0, seed: 42 }
}

#[test]
fn frozen_golden_guards_the_fixture_and_the_oracle() {
    let (src, tgt, _) = fixture(&small_fixture_config());
    let sc = scoring(2, MarginFunction::Ratio);
    let naive = oracle::NaiveScorer::new(&src, &tgt, &sc, None, None);
    assert!(
        (naive.table[0][0] - GOLDEN_4X4_PAIR00_COSINE).abs() < 1e-15,
        "fixture or oracle drifted: cosine {}",
        naive.table[0][0]
    );
    assert!(
        (naive.score(0, 0) - GOLDEN_4X4_PAIR00_K2_RATIO).abs() < 1e-15,
        "fixture or oracle drifted: score {}",
        naive.score(0, 0)
    );
}

#[test]
fn library_reproduces_the_frozen_golden_score() {
    let (src, tgt, _) = fixture(&small_fixture_config());
    let sc = scoring(2, MarginFunction::Ratio);

    let batch = margin::score_all(&src, &tgt, &[(0, 0)], &sc, None, None).unwrap();
    assert!((batch[0] - GOLDEN_4X4_PAIR00_K2_RATIO).abs() < 1e-9, "batch path: {}", batch[0]);

    let x_lists = simcore::knn(&src, &tgt, sc.k, sc.dup, None).unwrap();
    let y_lists = simcore::knn(&tgt, &src, sc.k, sc.dup, None).unwrap();
    let a = simcore::cosine(src.row(0), tgt.row(0)).unwrap();
    assert!((a - GOLDEN_4X4_PAIR00_COSINE).abs() < 1e-9);
    let single = margin::score_pair(a, &x_lists[0], &y_lists[0], &sc).unwrap();
    assert!((single - GOLDEN_4X4_PAIR00_K2_RATIO).abs() < 1e-9, "pair path: {single}");
}

/// Prints the oracle values that are frozen as constants below. Run with
/// `--ignored --nocapture` after any intentional fixture change, then
/// update the constants by hand.
#[test]
#[ignore]
fn regenerate_golden_values() {
    let (src, tgt, _) = fixture(&small_fixture_config());
    let sc = scoring(2, MarginFunction::Ratio);
    let naive = oracle::NaiveScorer::new(&src, &tgt, &sc, None, None);
    println!("4x4 pair (0,0) k=2 ratio: {:.17}", naive.score(0, 0));
    println!("4x4 pair (0,0) cosine:    {:.17}", naive.table[0][0]);

    let hub = SynthConfig { n_pairs: 1000, n_distractors: 0, dim: 32, noise: 0.8, n_hubs: 20, hub_strength: 0.9, seed: 42 };
    let (src, tgt, gold) = fixture(&hub);
    for margin_fn in [MarginFunction::Absolute, MarginFunction::Distance, MarginFunction::Ratio] {
        let sc = scoring(4, margin_fn);
        let naive = oracle::NaiveScorer::new(&src, &tgt, &sc, None, None);
        let mut f1s = Vec::new();
        for strategy in [
            RetrievalStrategy::Forward,
            RetrievalStrategy::Backward,
            RetrievalStrategy::Intersection,
            RetrievalStrategy::MaxScore,
        ] {
            let (t, f1) = oracle::best_f1_exhaustive(&naive.mine(strategy), &gold);
            println!("hub fixture {margin_fn} {strategy}: best F1 {f1:.17} at threshold {t:.17}");
            f1s.push(f1);
        }
        let spread = f1s.iter().cloned().fold(f64::MIN, f64::max)
            - f1s.iter().cloned().fold(f64::MAX, f64::min);
        println!("hub fixture {margin_fn} strategy spread: {spread:.17}");
    }
}
