//! `bitext`: mine, score, filter, and evaluate parallel sentence pairs from
//! raw embedding matrices on disk.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, bad
//! configuration), 2 for data errors (missing or malformed files,
//! inconsistent shapes).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use bitext_core::embed_io::{self, Corpus, EmbeddingMatrix, GoldAlignment, GoldMode};
use bitext_core::error::Error as CoreError;
use bitext_core::evalsuite;
use bitext_core::margin::{self, MarginFunction, ScoringConfig};
use bitext_core::prefilter::FilterRuleConfig;
use bitext_core::retrieval::{
    self, CandidatePair, FilterConfig, Origin, RetrievalStrategy, SearchSpace,
};
use bitext_core::simcore::{DuplicateRule, DEFAULT_BLOCK_SIZE};
use bitext_core::synthgen::{self, SynthConfig};

#[derive(Parser)]
#[command(
    name = "bitext",
    version,
    about = "Margin-based parallel sentence mining, scoring, filtering, and evaluation"
)]
struct Cli {
    /// Worker threads; 0 or unset means all cores. The BITEXT_THREADS
    /// environment variable supplies a default. Outputs never depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine candidate pairs from two embedding matrices
    Mine(MineArgs),
    /// Score an explicit pair list, or an aligned bitext row-by-row
    Score(ScoreArgs),
    /// Cut a scored candidate file by threshold and/or top-n
    Filter(FilterArgs),
    /// Clean raw sentence pairs with the rule-based filter
    Prefilter(PrefilterArgs),
    /// Compare a candidate file against a gold alignment
    Eval(EvalArgs),
    /// Precision-at-1 of forward retrieval on an aligned corpus
    Reconstruct(ReconstructArgs),
    /// Generate a deterministic synthetic corpus with planted pairs
    Synth(SynthArgs),
}

/// Sentence-file flags shared by every subcommand that can name rows.
#[derive(Args)]
struct TextArgs {
    /// Source sentences, one per line (`id<TAB>sentence` with --ids)
    #[arg(long, value_name = "FILE")]
    src_text: Option<PathBuf>,

    /// Target sentences, one per line (`id<TAB>sentence` with --ids)
    #[arg(long, value_name = "FILE")]
    tgt_text: Option<PathBuf>,

    /// Sentence files carry `id<TAB>sentence` lines; pair files use the ids
    #[arg(long)]
    ids: bool,
}

impl TextArgs {
    fn load(&self) -> CliResult<Option<(Corpus, Corpus)>> {
        match (&self.src_text, &self.tgt_text) {
            (None, None) if self.ids => {
                Err(CliError::Usage("--ids needs --src-text and --tgt-text".into()))
            }
            (None, None) => Ok(None),
            (Some(s), Some(t)) => Ok(Some((
                embed_io::load_corpus(s, self.ids)?,
                embed_io::load_corpus(t, self.ids)?,
            ))),
            _ => Err(CliError::Usage("--src-text and --tgt-text must be given together".into())),
        }
    }
}

/// How kNN search treats repeated database entries.
#[derive(Clone, Copy, PartialEq, Eq)]
enum DedupChoice {
    /// By text when sentence files are given, else by vector.
    Auto,
    None,
    Text,
    Vector,
}

fn parse_dedup(s: &str) -> Result<DedupChoice, String> {
    match s {
        "auto" => Ok(DedupChoice::Auto),
        "none" => Ok(DedupChoice::None),
        "text" => Ok(DedupChoice::Text),
        "vector" => Ok(DedupChoice::Vector),
        other => Err(format!("unknown dedup rule {other:?} (expected auto, none, text, or vector)")),
    }
}

/// Accepts the short spellings alongside the canonical strategy names.
fn parse_retrieval(s: &str) -> Result<RetrievalStrategy, CoreError> {
    match s {
        "fwd" => Ok(RetrievalStrategy::Forward),
        "bwd" => Ok(RetrievalStrategy::Backward),
        "intersect" => Ok(RetrievalStrategy::Intersection),
        "max" => Ok(RetrievalStrategy::MaxScore),
        other => other.parse(),
    }
}

#[derive(Args)]
struct MineArgs {
    /// Source embeddings: headerless row-major little-endian float32
    #[arg(long, value_name = "FILE")]
    src_emb: PathBuf,

    /// Target embeddings, same format and dimension
    #[arg(long, value_name = "FILE")]
    tgt_emb: PathBuf,

    /// Embedding dimension of both matrices
    #[arg(long, value_name = "D")]
    dim: usize,

    /// Neighborhood size for the margin penalty
    #[arg(long, default_value_t = 4, value_name = "K")]
    k: usize,

    /// Margin function: absolute, distance, or ratio
    #[arg(long, default_value = "ratio")]
    margin: MarginFunction,

    /// Candidate strategy: fwd, bwd, intersect, or max
    #[arg(long, default_value = "max", value_parser = parse_retrieval)]
    retrieval: RetrievalStrategy,

    /// Keep only pairs scoring at least this much
    #[arg(long, value_name = "T")]
    threshold: Option<f64>,

    /// Keep at most this many of the best-scoring pairs
    #[arg(long, value_name = "N")]
    top_n: Option<usize>,

    #[command(flatten)]
    text: TextArgs,

    /// Repeated-entry handling in kNN search: auto, none, text, or vector
    #[arg(long, default_value = "auto", value_parser = parse_dedup)]
    dedup: DedupChoice,

    /// Rows per kNN block; trades memory for speed, never changes output
    #[arg(long, value_name = "N")]
    batch_size: Option<usize>,

    /// Candidate TSV: score, source, target
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    src_emb: PathBuf,

    #[arg(long, value_name = "FILE")]
    tgt_emb: PathBuf,

    #[arg(long, value_name = "D")]
    dim: usize,

    /// Pair list TSV, source and target per line; without it the matrices
    /// are treated as an aligned bitext and scored row-by-row
    #[arg(long, value_name = "FILE")]
    pairs: Option<PathBuf>,

    #[arg(long, default_value_t = 4, value_name = "K")]
    k: usize,

    #[arg(long, default_value = "ratio")]
    margin: MarginFunction,

    #[command(flatten)]
    text: TextArgs,

    #[arg(long, default_value = "auto", value_parser = parse_dedup)]
    dedup: DedupChoice,

    /// Pairs per scoring block; trades memory for speed, never changes output
    #[arg(long, value_name = "N")]
    batch_size: Option<usize>,

    /// Scored TSV in input pair order
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct FilterArgs {
    /// Scored candidate TSV, sorted or not
    #[arg(long, value_name = "FILE")]
    input: PathBuf,

    /// Keep only pairs scoring at least this much
    #[arg(long, value_name = "T")]
    threshold: Option<f64>,

    /// Keep at most this many of the best-scoring pairs
    #[arg(long, value_name = "N")]
    top_n: Option<usize>,

    #[command(flatten)]
    text: TextArgs,

    /// Filtered candidate TSV, descending by score
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
}

#[derive(Args)]
struct PrefilterArgs {
    /// Pair-per-line input TSV: source and target sentence
    #[arg(long, value_name = "FILE", conflicts_with_all = ["src", "tgt"])]
    tsv: Option<PathBuf>,

    /// Source side, one sentence per line (aligned with --tgt)
    #[arg(long, value_name = "FILE", requires = "tgt")]
    src: Option<PathBuf>,

    /// Target side, one sentence per line (aligned with --src)
    #[arg(long, value_name = "FILE", requires = "src")]
    tgt: Option<PathBuf>,

    /// Kept pairs as TSV (use with --tsv input)
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Kept source lines (use with --src/--tgt input)
    #[arg(long, value_name = "FILE")]
    out_src: Option<PathBuf>,

    /// Kept target lines (use with --src/--tgt input)
    #[arg(long, value_name = "FILE")]
    out_tgt: Option<PathBuf>,

    /// Per-reason rejection counts as `reason<TAB>count` lines
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,

    #[arg(long, default_value_t = 3, value_name = "N")]
    min_tokens: usize,

    #[arg(long, default_value_t = 80, value_name = "N")]
    max_tokens: usize,

    /// Reject when the token-set overlap reaches this fraction
    #[arg(long, default_value_t = 0.5, value_name = "F")]
    max_overlap: f64,

    /// Reject when one side is more than this many times longer
    #[arg(long, default_value_t = 2.0, value_name = "R")]
    max_len_ratio: f64,

    /// Expected language pair, e.g. "de,en"; checked against --tags
    #[arg(long, value_name = "SRC,TGT")]
    langs: Option<String>,

    /// Detected language tags, `src<TAB>tgt` per line, aligned with the input
    #[arg(long, value_name = "FILE")]
    tags: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Scored candidate TSV
    #[arg(long, value_name = "FILE")]
    candidates: PathBuf,

    /// Gold alignment TSV: source and target per line
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,

    /// Sweep score cutoffs and report the best-F1 threshold
    #[arg(long)]
    optimize_threshold: bool,

    /// One tab-separated record instead of the human-readable block
    #[arg(long)]
    machine: bool,

    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long, value_name = "FILE")]
    src_emb: PathBuf,

    #[arg(long, value_name = "FILE")]
    tgt_emb: PathBuf,

    #[arg(long, value_name = "D")]
    dim: usize,

    #[arg(long, default_value_t = 4, value_name = "K")]
    k: usize,

    #[arg(long, default_value = "ratio")]
    margin: MarginFunction,

    /// Gold alignment TSV; defaults to the identity over the aligned rows
    #[arg(long, value_name = "FILE")]
    gold: Option<PathBuf>,

    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Planted translation pairs
    #[arg(long, value_name = "N")]
    pairs: usize,

    /// Unpaired rows appended to each side
    #[arg(long, default_value_t = 0, value_name = "N")]
    distractors: usize,

    #[arg(long, value_name = "D")]
    dim: usize,

    /// Perturbation length applied to each planted target
    #[arg(long, default_value_t = 0.0, value_name = "F")]
    noise: f64,

    /// Hub rows appended to the target side
    #[arg(long, default_value_t = 0, value_name = "N")]
    hubs: usize,

    /// Centroid weight of each hub, in [0, 1]
    #[arg(long, default_value_t = 0.0, value_name = "F")]
    hub_strength: f64,

    /// RNG seed; the only source of randomness in the toolkit
    #[arg(long, value_name = "SEED")]
    seed: u64,

    /// Directory for src.emb, tgt.emb, src.txt, tgt.txt, and gold.tsv
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

/// Failures split by exit code: flag/configuration problems exit 1, file
/// and shape problems exit 2.
enum CliError {
    Usage(String),
    Data(String),
}

type CliResult<T> = Result<T, CliError>;

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidK { .. }
            | CoreError::InvalidConfig(_)
            | CoreError::EmptyFilterConfig => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too; those are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Mine(a) => run_mine(a),
        Command::Score(a) => run_score(a),
        Command::Filter(a) => run_filter(a),
        Command::Prefilter(a) => run_prefilter(a),
        Command::Eval(a) => run_eval(a),
        Command::Reconstruct(a) => run_reconstruct(a),
        Command::Synth(a) => run_synth(a),
    }
}

/// Sizes the global worker pool from --threads, falling back to the
/// BITEXT_THREADS environment variable. 0 keeps the default (all cores).
fn init_threads(flag: Option<usize>) -> CliResult<()> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("BITEXT_THREADS") {
            Ok(v) => v.trim().parse::<usize>().map_err(|_| {
                CliError::Usage(format!("BITEXT_THREADS={v:?} is not a thread count"))
            })?,
            Err(_) => return Ok(()),
        },
    };
    if n == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn load_matrix(path: &Path, dim: usize) -> CliResult<EmbeddingMatrix> {
    let m = embed_io::load_embeddings(path, dim)?;
    Ok(embed_io::normalize_rows(m)?)
}

fn check_rows(corpus: &Corpus, matrix: &EmbeddingMatrix, what: &'static str) -> CliResult<()> {
    if corpus.len() != matrix.rows() {
        return Err(CoreError::RowCountMismatch {
            what,
            expected: matrix.rows(),
            actual: corpus.len(),
        }
        .into());
    }
    Ok(())
}

fn corpus_refs(corpora: &Option<(Corpus, Corpus)>) -> (Option<&Corpus>, Option<&Corpus>) {
    match corpora {
        Some((s, t)) => (Some(s), Some(t)),
        None => (None, None),
    }
}

fn corpus_pair(corpora: &Option<(Corpus, Corpus)>) -> Option<(&Corpus, &Corpus)> {
    corpora.as_ref().map(|(s, t)| (s, t))
}

fn resolve_dedup(choice: DedupChoice, corpora: &Option<(Corpus, Corpus)>) -> CliResult<DuplicateRule> {
    match choice {
        DedupChoice::Auto if corpora.is_some() => Ok(DuplicateRule::ByText),
        DedupChoice::Auto => Ok(DuplicateRule::ByVector),
        DedupChoice::None => Ok(DuplicateRule::None),
        DedupChoice::Vector => Ok(DuplicateRule::ByVector),
        DedupChoice::Text if corpora.is_some() => Ok(DuplicateRule::ByText),
        DedupChoice::Text => {
            Err(CliError::Usage("--dedup text needs --src-text and --tgt-text".into()))
        }
    }
}

fn run_mine(a: MineArgs) -> CliResult<()> {
    let src = load_matrix(&a.src_emb, a.dim)?;
    let tgt = load_matrix(&a.tgt_emb, a.dim)?;
    let corpora = a.text.load()?;
    if let Some((sc, tc)) = &corpora {
        check_rows(sc, &src, "source sentences")?;
        check_rows(tc, &tgt, "target sentences")?;
    }
    let cfg = ScoringConfig {
        k: a.k,
        margin: a.margin,
        dup: resolve_dedup(a.dedup, &corpora)?,
    };
    let (sc, tc) = corpus_refs(&corpora);
    let mut pairs = retrieval::mine_candidates_in(
        SearchSpace::NearestK,
        &src,
        &tgt,
        a.retrieval,
        &cfg,
        sc,
        tc,
        a.batch_size.unwrap_or(DEFAULT_BLOCK_SIZE),
    )?;
    retrieval::sort_by_score(&mut pairs);
    if a.threshold.is_some() || a.top_n.is_some() {
        let cut = FilterConfig { threshold: a.threshold, top_n: a.top_n };
        pairs = retrieval::filter_candidates(&pairs, &cut)?;
    }
    embed_io::write_candidates(&pairs, &a.output, corpus_pair(&corpora))?;
    match (pairs.last(), pairs.first()) {
        (Some(min), Some(max)) => eprintln!(
            "kept {} pairs (score min {:.6} max {:.6})",
            pairs.len(),
            min.score,
            max.score
        ),
        _ => eprintln!("kept 0 pairs"),
    }
    Ok(())
}

fn run_score(a: ScoreArgs) -> CliResult<()> {
    let src = load_matrix(&a.src_emb, a.dim)?;
    let tgt = load_matrix(&a.tgt_emb, a.dim)?;
    let corpora = a.text.load()?;
    if let Some((sc, tc)) = &corpora {
        check_rows(sc, &src, "source sentences")?;
        check_rows(tc, &tgt, "target sentences")?;
    }
    let id_corpora = if a.text.ids { corpus_pair(&corpora) } else { None };
    let pair_list = match &a.pairs {
        Some(path) => embed_io::read_pair_list(path, id_corpora)?,
        None => {
            if src.rows() != tgt.rows() {
                return Err(CoreError::RowCountMismatch {
                    what: "aligned target rows",
                    expected: src.rows(),
                    actual: tgt.rows(),
                }
                .into());
            }
            (0..src.rows()).map(|i| (i, i)).collect()
        }
    };
    let cfg = ScoringConfig {
        k: a.k,
        margin: a.margin,
        dup: resolve_dedup(a.dedup, &corpora)?,
    };
    let (sc, tc) = corpus_refs(&corpora);
    let scores = margin::score_all_blocked(
        &src,
        &tgt,
        &pair_list,
        &cfg,
        sc,
        tc,
        a.batch_size.unwrap_or(usize::MAX),
    )?;
    let scored: Vec<CandidatePair> = pair_list
        .iter()
        .zip(&scores)
        .map(|(&(src, tgt), &score)| CandidatePair { src, tgt, score, origin: Origin::Both })
        .collect();
    embed_io::write_scored_pairs(&scored, &a.output, corpus_pair(&corpora))?;
    Ok(())
}

fn run_filter(a: FilterArgs) -> CliResult<()> {
    let corpora = a.text.load()?;
    let id_corpora = if a.text.ids { corpus_pair(&corpora) } else { None };
    let pairs = embed_io::read_candidates(&a.input, id_corpora)?;
    let cut = FilterConfig { threshold: a.threshold, top_n: a.top_n };
    let kept = retrieval::filter_candidates(&pairs, &cut)?;
    embed_io::write_candidates(&kept, &a.output, id_corpora)?;
    eprintln!("kept {} of {} pairs", kept.len(), pairs.len());
    Ok(())
}

fn read_pair_lines(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text =
        fs::read_to_string(path).map_err(|source| CoreError::Io { path: path.into(), source })?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let (src, tgt) = line.split_once('\t').ok_or_else(|| CoreError::MalformedLine {
            path: path.into(),
            line: lineno + 1,
            msg: "expected two tab-separated columns".into(),
        })?;
        pairs.push((src.to_string(), tgt.to_string()));
    }
    Ok(pairs)
}

fn read_lines(path: &Path) -> CliResult<Vec<String>> {
    let text =
        fs::read_to_string(path).map_err(|source| CoreError::Io { path: path.into(), source })?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CoreError::Io { path: path.into(), source })?;
    Ok(())
}

fn run_prefilter(a: PrefilterArgs) -> CliResult<()> {
    let usage = |msg: &str| Err(CliError::Usage(msg.into()));

    let split_input = a.src.is_some();
    let pairs: Vec<(String, String)> = match (&a.tsv, &a.src, &a.tgt) {
        (Some(tsv), None, None) => read_pair_lines(tsv)?,
        (None, Some(s), Some(t)) => {
            let src = read_lines(s)?;
            let tgt = read_lines(t)?;
            if src.len() != tgt.len() {
                return Err(CoreError::RowCountMismatch {
                    what: "target sentences",
                    expected: src.len(),
                    actual: tgt.len(),
                }
                .into());
            }
            src.into_iter().zip(tgt).collect()
        }
        _ => return usage("input needed: --tsv, or --src with --tgt"),
    };
    match (split_input, &a.output, &a.out_src, &a.out_tgt) {
        (false, Some(_), None, None) | (true, None, Some(_), Some(_)) => {}
        (false, _, _, _) => return usage("--tsv input writes to --output"),
        (true, _, _, _) => return usage("--src/--tgt input writes to --out-src and --out-tgt"),
    }

    let expected_langs = match &a.langs {
        None => None,
        Some(spec) => match spec.split_once(',') {
            Some((s, t)) if !s.is_empty() && !t.is_empty() => {
                Some((s.to_string(), t.to_string()))
            }
            _ => return usage("--langs takes two comma-separated tags, e.g. \"de,en\""),
        },
    };
    let tags = a.tags.as_deref().map(read_pair_lines).transpose()?;

    let cfg = FilterRuleConfig {
        min_tokens: a.min_tokens,
        max_tokens: a.max_tokens,
        max_overlap: a.max_overlap,
        max_len_ratio: a.max_len_ratio,
        expected_langs,
    };
    let (kept, stats) = bitext_core::prefilter::prefilter_corpus(&pairs, &cfg, tags.as_deref())?;

    if split_input {
        let mut src_out = String::new();
        let mut tgt_out = String::new();
        for (s, t) in &kept {
            src_out.push_str(s);
            src_out.push('\n');
            tgt_out.push_str(t);
            tgt_out.push('\n');
        }
        write_text(a.out_src.as_deref().expect("validated above"), &src_out)?;
        write_text(a.out_tgt.as_deref().expect("validated above"), &tgt_out)?;
    } else {
        let mut out = String::new();
        for (s, t) in &kept {
            out.push_str(s);
            out.push('\t');
            out.push_str(t);
            out.push('\n');
        }
        write_text(a.output.as_deref().expect("validated above"), &out)?;
    }
    if let Some(stats_path) = &a.stats {
        let summary = format!("kept\t{}\n{}", stats.kept, stats.summary());
        write_text(stats_path, &summary)?;
    }
    eprintln!("kept {} of {} pairs", stats.kept, stats.total());
    Ok(())
}

fn run_eval(a: EvalArgs) -> CliResult<()> {
    let corpora = a.text.load()?;
    let id_corpora = if a.text.ids { corpus_pair(&corpora) } else { None };
    let pairs = embed_io::read_candidates(&a.candidates, id_corpora)?;
    let mode = if a.text.ids { GoldMode::Id } else { GoldMode::Index };
    let (sc, tc) = corpus_refs(&corpora);
    let gold = embed_io::load_gold(&a.gold, mode, sc, tc)?;

    let report = if a.optimize_threshold {
        let (_, report) = evalsuite::optimize_threshold(&pairs, &gold)?;
        report
    } else {
        let predicted: BTreeSet<(usize, usize)> = pairs.iter().map(CandidatePair::key).collect();
        evalsuite::prf1(&predicted, &gold)?
    };
    if a.machine {
        println!("{}", report.machine_line());
    } else {
        println!("{}", report.human());
    }
    Ok(())
}

fn run_reconstruct(a: ReconstructArgs) -> CliResult<()> {
    let src = load_matrix(&a.src_emb, a.dim)?;
    let tgt = load_matrix(&a.tgt_emb, a.dim)?;
    let corpora = a.text.load()?;
    if let Some((sc, tc)) = &corpora {
        check_rows(sc, &src, "source sentences")?;
        check_rows(tc, &tgt, "target sentences")?;
    }
    let (sc, tc) = corpus_refs(&corpora);
    let gold = match &a.gold {
        Some(path) => {
            let mode = if a.text.ids { GoldMode::Id } else { GoldMode::Index };
            embed_io::load_gold(path, mode, sc, tc)?
        }
        None => {
            let n = src.rows().min(tgt.rows());
            if src.rows() != tgt.rows() {
                log::warn!(
                    "row counts differ ({} vs {}); identity gold covers the first {} rows",
                    src.rows(),
                    tgt.rows(),
                    n
                );
            }
            GoldAlignment::from_pairs((0..n).map(|i| (i, i)))
        }
    };
    let cfg = ScoringConfig { k: a.k, margin: a.margin, dup: DuplicateRule::None };
    let candidates = retrieval::forward_candidates(&src, &tgt, &cfg, sc, tc)?;
    let p_at_1 = evalsuite::precision_at_1(&candidates, &gold)?;
    println!("P@1\t{p_at_1:.6}");
    Ok(())
}

fn run_synth(a: SynthArgs) -> CliResult<()> {
    let cfg = SynthConfig {
        n_pairs: a.pairs,
        n_distractors: a.distractors,
        dim: a.dim,
        noise: a.noise,
        n_hubs: a.hubs,
        hub_strength: a.hub_strength,
        seed: a.seed,
    };
    let (src, tgt, gold) = synthgen::generate(&cfg)?;
    fs::create_dir_all(&a.out_dir)
        .map_err(|source| CoreError::Io { path: a.out_dir.clone(), source })?;
    embed_io::write_embeddings(&src, a.out_dir.join("src.emb"))?;
    embed_io::write_embeddings(&tgt, a.out_dir.join("tgt.emb"))?;
    let placeholder = |prefix: &str, n: usize| {
        Corpus::from_sentences((0..n).map(|i| format!("{prefix}-{i}")).collect())
    };
    embed_io::write_corpus(&placeholder("src", src.rows()), a.out_dir.join("src.txt"))?;
    embed_io::write_corpus(&placeholder("tgt", tgt.rows()), a.out_dir.join("tgt.txt"))?;
    embed_io::write_gold(&gold, a.out_dir.join("gold.tsv"), None)?;
    eprintln!(
        "wrote {} source and {} target rows (dim {}) to {}",
        src.rows(),
        tgt.rows(),
        a.dim,
        a.out_dir.display()
    );
    Ok(())
}
