//! File formats: raw embedding matrices, sentence corpora, gold alignments,
//! and scored candidate lists.
//!
//! Embedding files are headerless, row-major, little-endian IEEE-754 binary32.
//! The dimension is not stored in the file; callers supply it and the row
//! count falls out as `byte length / (4 * dim)`. Sentence files are UTF-8,
//! one sentence per line, optionally prefixed with an external id and a tab.
//! Gold alignments and candidate lists are TSV.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::retrieval::{CandidatePair, Origin};

/// Dense row-major matrix of sentence embeddings.
///
/// `excluded` lists rows that stay in place (so row indices keep lining up
/// with corpus lines) but must not take part in candidate generation; it is
/// populated when all-zero rows are loaded under [`ZeroRowPolicy::Exclude`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f32>,
    rows: usize,
    dim: usize,
    normalized: bool,
    excluded: Vec<usize>,
}

impl EmbeddingMatrix {
    /// Wraps a flat row-major buffer. Fails if `dim` is zero or does not
    /// divide the buffer length.
    pub fn from_vec(data: Vec<f32>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be at least 1".into()));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::InvalidConfig(format!(
                "buffer of {} values is not divisible by dim {}",
                data.len(),
                dim
            )));
        }
        let rows = data.len() / dim;
        Ok(Self { data, rows, dim, normalized: false, excluded: Vec::new() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// True once rows have been L2-normalized (or were constructed normalized).
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Rows barred from candidate generation, ascending.
    pub fn excluded_rows(&self) -> &[usize] {
        &self.excluded
    }

    pub fn is_excluded(&self, row: usize) -> bool {
        self.excluded.binary_search(&row).is_ok()
    }

    pub(crate) fn set_excluded(&mut self, mut rows: Vec<usize>) {
        rows.sort_unstable();
        rows.dedup();
        self.excluded = rows;
    }

    /// Marks the matrix as already row-normalized. Callers must guarantee
    /// every non-excluded row has unit L2 norm within 1e-4.
    pub(crate) fn assume_normalized(mut self) -> Self {
        debug_assert!(self.unit_row_violation(1e-4).is_none());
        self.normalized = true;
        self
    }

    /// Returns the first non-excluded row whose L2 norm strays from 1.0 by
    /// more than `tol`, if any.
    pub fn unit_row_violation(&self, tol: f64) -> Option<usize> {
        (0..self.rows).find(|&i| {
            !self.is_excluded(i) && {
                let norm = row_norm(self.row(i));
                (norm - 1.0).abs() > tol
            }
        })
    }
}

fn row_norm(row: &[f32]) -> f64 {
    row.iter().map(|&v| v as f64 * v as f64).sum::<f64>().sqrt()
}

/// What to do with all-zero rows at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroRowPolicy {
    /// Fail the load, reporting every zero row index.
    Error,
    /// Keep the rows in place but exclude them from candidate generation.
    Exclude,
}

/// Loads a raw little-endian binary32 embedding file. All-zero rows fail the
/// load; see [`load_embeddings_with`] for the permissive variant.
pub fn load_embeddings(path: impl AsRef<Path>, dim: usize) -> Result<EmbeddingMatrix> {
    load_embeddings_with(path, dim, ZeroRowPolicy::Error)
}

pub fn load_embeddings_with(
    path: impl AsRef<Path>,
    dim: usize,
    policy: ZeroRowPolicy,
) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    if dim == 0 {
        return Err(Error::InvalidConfig("embedding dimension must be at least 1".into()));
    }
    let bytes = fs::read(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let row_bytes = 4 * dim as u64;
    if !(bytes.len() as u64).is_multiple_of(row_bytes) {
        return Err(Error::BadFileSize { path: path.into(), bytes: bytes.len() as u64, row_bytes });
    }
    let data: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let mut matrix = EmbeddingMatrix::from_vec(data, dim)?;

    let mut zero_rows = Vec::new();
    for i in 0..matrix.rows() {
        let row = matrix.row(i);
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { path: path.into(), row: i });
        }
        if row.iter().all(|&v| v == 0.0) {
            zero_rows.push(i);
        }
    }
    if !zero_rows.is_empty() {
        match policy {
            ZeroRowPolicy::Error => {
                return Err(Error::ZeroRows { path: path.into(), rows: zero_rows })
            }
            ZeroRowPolicy::Exclude => {
                log::warn!(
                    "{}: excluding {} all-zero rows from candidate generation",
                    path.display(),
                    zero_rows.len()
                );
                matrix.set_excluded(zero_rows);
            }
        }
    }
    Ok(matrix)
}

/// Writes the matrix in the same raw binary32 format that [`load_embeddings`]
/// reads; a write/load round trip reproduces the data bit for bit.
pub fn write_embeddings(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io { path: path.into(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for v in matrix.data() {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Divides every non-excluded row by its L2 norm. Idempotent within 1e-6.
pub fn normalize_rows(mut matrix: EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    let dim = matrix.dim;
    for i in 0..matrix.rows {
        if matrix.is_excluded(i) {
            continue;
        }
        let row = &mut matrix.data[i * dim..(i + 1) * dim];
        let norm = row_norm(row);
        if norm == 0.0 {
            return Err(Error::ZeroNormRow { row: i });
        }
        for v in row {
            *v = (*v as f64 / norm) as f32;
        }
    }
    matrix.normalized = true;
    Ok(matrix)
}

/// Sentence corpus: one sentence per line, optionally with external ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    sentences: Vec<String>,
    ids: Option<Vec<String>>,
}

impl Corpus {
    pub fn from_sentences(sentences: Vec<String>) -> Self {
        Self { sentences, ids: None }
    }

    /// Builds an id-carrying corpus. `ids` must parallel `sentences`.
    pub fn with_ids(ids: Vec<String>, sentences: Vec<String>) -> Result<Self> {
        if ids.len() != sentences.len() {
            return Err(Error::RowCountMismatch {
                what: "corpus ids",
                expected: sentences.len(),
                actual: ids.len(),
            });
        }
        Ok(Self { sentences, ids: Some(ids) })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, i: usize) -> &str {
        &self.sentences[i]
    }

    pub fn sentences(&self) -> &[String] {
        &self.sentences
    }

    pub fn has_ids(&self) -> bool {
        self.ids.is_some()
    }

    pub fn id(&self, i: usize) -> Option<&str> {
        self.ids.as_ref().map(|ids| ids[i].as_str())
    }

    /// Maps each id to its row index. Requires ids.
    pub fn id_index(&self) -> Option<HashMap<&str, usize>> {
        self.ids
            .as_ref()
            .map(|ids| ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect())
    }
}

/// Loads a sentence file. With `with_ids`, every line must be
/// `id<TAB>sentence` and ids must be unique.
pub fn load_corpus(path: impl AsRef<Path>, with_ids: bool) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let mut sentences = Vec::new();
    if !with_ids {
        sentences.extend(lines_of(&text).map(str::to_owned));
        return Ok(Corpus::from_sentences(sentences));
    }
    let mut ids = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (lineno, line) in lines_of(&text).enumerate() {
        let (id, sentence) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            path: path.into(),
            line: lineno + 1,
            msg: "expected id<TAB>sentence".into(),
        })?;
        if seen.insert(id.to_owned(), lineno).is_some() {
            return Err(Error::DuplicateId { path: path.into(), line: lineno + 1, id: id.into() });
        }
        ids.push(id.to_owned());
        sentences.push(sentence.to_owned());
    }
    Corpus::with_ids(ids, sentences)
}

/// Writes a corpus back out, `id<TAB>sentence` when ids are present.
pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io { path: path.into(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for i in 0..corpus.len() {
        match corpus.id(i) {
            Some(id) => writeln!(w, "{}\t{}", id, corpus.sentence(i)),
            None => writeln!(w, "{}", corpus.sentence(i)),
        }
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Splits text into lines; `str::lines` already tolerates a missing final
/// newline and CRLF endings.
fn lines_of(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
}

/// Set of aligned (source row, target row) pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GoldAlignment {
    pairs: BTreeSet<(usize, usize)>,
}

impl GoldAlignment {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self { pairs: pairs.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, src: usize, tgt: usize) -> bool {
        self.pairs.contains(&(src, tgt))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }
}

/// How a gold TSV names sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldMode {
    /// Two 0-based row indices per line.
    Index,
    /// Two external sentence ids per line, resolved through the corpora.
    Id,
}

/// Loads a two-column gold TSV. Duplicate lines collapse; in index mode
/// bounds are checked against whichever corpora are supplied; id mode
/// requires both corpora to carry ids.
pub fn load_gold(
    path: impl AsRef<Path>,
    mode: GoldMode,
    src_corpus: Option<&Corpus>,
    tgt_corpus: Option<&Corpus>,
) -> Result<GoldAlignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let mut pairs = BTreeSet::new();

    let id_maps = match mode {
        GoldMode::Index => None,
        GoldMode::Id => {
            let src_map = src_corpus.and_then(Corpus::id_index).ok_or(Error::MissingCorpus)?;
            let tgt_map = tgt_corpus.and_then(Corpus::id_index).ok_or(Error::MissingCorpus)?;
            Some((src_map, tgt_map))
        }
    };

    for (lineno, line) in lines_of(&text).enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            path: path.into(),
            line: lineno + 1,
            msg: "expected two tab-separated columns".into(),
        })?;
        let pair = match &id_maps {
            None => {
                let parse = |field: &str| {
                    field.trim().parse::<usize>().map_err(|_| Error::MalformedLine {
                        path: path.into(),
                        line: lineno + 1,
                        msg: format!("{field:?} is not a 0-based index"),
                    })
                };
                let (s, t) = (parse(a)?, parse(b)?);
                for (idx, corpus) in [(s, src_corpus), (t, tgt_corpus)] {
                    if let Some(c) = corpus {
                        if idx >= c.len() {
                            return Err(Error::IndexOutOfRange {
                                path: path.into(),
                                line: lineno + 1,
                                index: idx,
                                rows: c.len(),
                            });
                        }
                    }
                }
                (s, t)
            }
            Some((src_map, tgt_map)) => {
                let resolve = |map: &HashMap<&str, usize>, id: &str| {
                    map.get(id.trim()).copied().ok_or_else(|| Error::UnknownId {
                        path: path.into(),
                        line: lineno + 1,
                        id: id.trim().into(),
                    })
                };
                (resolve(src_map, a)?, resolve(tgt_map, b)?)
            }
        };
        pairs.insert(pair);
    }
    Ok(GoldAlignment { pairs })
}

/// Writes a gold alignment as TSV, using external ids when both corpora
/// carry them and 0-based indices otherwise.
pub fn write_gold(
    gold: &GoldAlignment,
    path: impl AsRef<Path>,
    corpora: Option<(&Corpus, &Corpus)>,
) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io { path: path.into(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    for (s, t) in gold.iter() {
        match label_pair(s, t, corpora)? {
            (Some(sid), Some(tid)) => writeln!(w, "{sid}\t{tid}"),
            _ => writeln!(w, "{s}\t{t}"),
        }
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn label_pair<'c>(
    src: usize,
    tgt: usize,
    corpora: Option<(&'c Corpus, &'c Corpus)>,
) -> Result<(Option<&'c str>, Option<&'c str>)> {
    let Some((sc, tc)) = corpora else { return Ok((None, None)) };
    for (idx, corpus, side) in [(src, sc, "source"), (tgt, tc, "target")] {
        if idx >= corpus.len() {
            return Err(Error::PairOutOfRange { side, index: idx, rows: corpus.len() });
        }
    }
    if sc.has_ids() && tc.has_ids() {
        Ok((sc.id(src), tc.id(tgt)))
    } else {
        Ok((None, None))
    }
}

/// Writes candidates as `score<TAB>src<TAB>tgt`, score at six decimal places.
///
/// The list must already be sorted by non-increasing score. Sentences are
/// named by external id when both corpora carry ids, else by 0-based index.
/// An empty list produces an empty file.
pub fn write_candidates(
    pairs: &[CandidatePair],
    path: impl AsRef<Path>,
    corpora: Option<(&Corpus, &Corpus)>,
) -> Result<()> {
    if let Some(position) = pairs.windows(2).position(|w| w[0].score < w[1].score) {
        return Err(Error::UnsortedCandidates { position: position + 1 });
    }
    write_scored_pairs(pairs, path, corpora)
}

/// [`write_candidates`] without the sortedness requirement: pairs are
/// written in the order given, for outputs that mirror an input pair list.
pub fn write_scored_pairs(
    pairs: &[CandidatePair],
    path: impl AsRef<Path>,
    corpora: Option<(&Corpus, &Corpus)>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for p in pairs {
        match label_pair(p.src, p.tgt, corpora)? {
            (Some(sid), Some(tid)) => writeln!(out, "{:.6}\t{}\t{}", p.score, sid, tid),
            _ => writeln!(out, "{:.6}\t{}\t{}", p.score, p.src, p.tgt),
        }
        .expect("writing to a String cannot fail");
    }
    fs::write(path, out).map_err(|source| Error::Io { path: path.into(), source })
}

/// Reads a `score<TAB>src<TAB>tgt` candidate file back in. With corpora the
/// src/tgt fields are resolved as external ids; without, they must be
/// 0-based indices. Input order is preserved and no sorting is assumed.
/// The file does not record mining direction, so pairs come back with
/// [`Origin::Both`].
pub fn read_candidates(
    path: impl AsRef<Path>,
    corpora: Option<(&Corpus, &Corpus)>,
) -> Result<Vec<CandidatePair>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let id_maps = match corpora {
        Some((sc, tc)) => {
            let sm = sc.id_index().ok_or(Error::MissingCorpus)?;
            let tm = tc.id_index().ok_or(Error::MissingCorpus)?;
            Some((sm, tm))
        }
        None => None,
    };
    let mut pairs = Vec::new();
    for (lineno, line) in lines_of(&text).enumerate() {
        if line.is_empty() {
            continue;
        }
        let malformed = |msg: String| Error::MalformedLine { path: path.into(), line: lineno + 1, msg };
        let mut cols = line.split('\t');
        let (score, a, b) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
            (Some(s), Some(a), Some(b), None) => (s, a, b),
            _ => return Err(malformed("expected score<TAB>src<TAB>tgt".into())),
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| malformed(format!("{score:?} is not a number")))?;
        let (src, tgt) = match &id_maps {
            Some((sm, tm)) => {
                let resolve = |map: &HashMap<&str, usize>, id: &str| {
                    map.get(id).copied().ok_or_else(|| Error::UnknownId {
                        path: path.into(),
                        line: lineno + 1,
                        id: id.into(),
                    })
                };
                (resolve(sm, a)?, resolve(tm, b)?)
            }
            None => {
                let parse = |field: &str| {
                    field.trim().parse::<usize>().map_err(|_| Error::MalformedLine {
                        path: path.into(),
                        line: lineno + 1,
                        msg: format!("{field:?} is not a 0-based index"),
                    })
                };
                (parse(a)?, parse(b)?)
            }
        };
        pairs.push(CandidatePair { src, tgt, score, origin: Origin::Both });
    }
    Ok(pairs)
}

/// Reads a two-column pair TSV preserving line order and duplicates, unlike
/// [`load_gold`] which collapses into a set. Used for explicit scoring.
pub fn read_pair_list(
    path: impl AsRef<Path>,
    corpora: Option<(&Corpus, &Corpus)>,
) -> Result<Vec<(usize, usize)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
    let id_maps = match corpora {
        Some((sc, tc)) => {
            let sm = sc.id_index().ok_or(Error::MissingCorpus)?;
            let tm = tc.id_index().ok_or(Error::MissingCorpus)?;
            Some((sm, tm))
        }
        None => None,
    };
    let mut pairs = Vec::new();
    for (lineno, line) in lines_of(&text).enumerate() {
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            path: path.into(),
            line: lineno + 1,
            msg: "expected two tab-separated columns".into(),
        })?;
        let pair = match &id_maps {
            Some((sm, tm)) => {
                let resolve = |map: &HashMap<&str, usize>, id: &str| {
                    map.get(id.trim()).copied().ok_or_else(|| Error::UnknownId {
                        path: path.into(),
                        line: lineno + 1,
                        id: id.trim().into(),
                    })
                };
                (resolve(sm, a)?, resolve(tm, b)?)
            }
            None => {
                let parse = |field: &str| {
                    field.trim().parse::<usize>().map_err(|_| Error::MalformedLine {
                        path: path.into(),
                        line: lineno + 1,
                        msg: format!("{field:?} is not a 0-based index"),
                    })
                };
                (parse(a)?, parse(b)?)
            }
        };
        pairs.push(pair);
    }
    Ok(pairs)
}
