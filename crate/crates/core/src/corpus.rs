//! Corpus ingestion: reading vertical/plain files, the cleaning pipeline,
//! and binning documents into ordered time periods.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::{Vocab, WordId};

/// Suffix marking tokens of the target POS class, so that e.g. a noun and a
/// homographic verb are counted separately. `~` is stripped from raw token
/// interiors during cleaning, which keeps the suffix reserved.
pub const TARGET_SUFFIX: &str = "~t";

/// Placeholder substituted for digit runs inside tokens.
pub const NUM_PLACEHOLDER: &str = "<num>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormatSpec {
    /// One token per line, `form<TAB>lemma<TAB>pos`; lines starting with
    /// `##` delimit documents.
    VerticalTsv,
    /// Whitespace-tokenized text; one file is one document.
    PlainText,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawToken {
    pub form: String,
    pub lemma: Option<String>,
    pub pos: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RawDocument {
    pub tokens: Vec<RawToken>,
    pub period: String,
    pub genre: Option<String>,
    pub source: String,
}

/// One group of input files sharing a period id (and optionally a genre).
#[derive(Debug, Clone)]
pub struct SourceGroup {
    pub period: String,
    pub genre: Option<String>,
    pub files: Vec<PathBuf>,
}

/// Token filtering and normalization options.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterConfig {
    pub stopwords: HashSet<String>,
    pub ocr_errors: HashSet<String>,
    /// Tag prefixes of content words kept as corpus tokens. Empty set means
    /// no POS filtering. Matching is case-insensitive.
    pub content_pos: BTreeSet<String>,
    pub min_word_len: usize,
    pub drop_capitalized: bool,
    /// Tag prefixes of the target class; matching tokens get [`TARGET_SUFFIX`].
    pub target_pos: BTreeSet<String>,
    /// Count lemmas instead of surface forms where the corpus provides them.
    pub use_lemma: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            stopwords: HashSet::new(),
            ocr_errors: HashSet::new(),
            content_pos: ["nn", "vb", "vv", "jj", "rb"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            min_word_len: 3,
            drop_capitalized: true,
            target_pos: ["nn"].iter().map(|s| s.to_string()).collect(),
            use_lemma: false,
        }
    }
}

impl FilterConfig {
    fn matches_any(prefixes: &BTreeSet<String>, tag: &str) -> bool {
        let tag = tag.to_ascii_lowercase();
        prefixes.iter().any(|p| tag.starts_with(p.as_str()))
    }
}

/// A cleaned document before interning: period id, genre, retained tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanTokens {
    pub period: String,
    pub genre: Option<String>,
    pub tokens: Vec<String>,
}

/// Interned document inside a [`PeriodCorpus`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CleanDocument {
    pub tokens: Vec<WordId>,
    pub genre: Option<String>,
}

/// Tokenized, filtered documents binned into ordered time periods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodCorpus {
    vocab: Vocab,
    periods: Vec<String>,
    docs: Vec<Vec<CleanDocument>>,
    token_totals: Vec<u64>,
    genre_totals: Vec<BTreeMap<String, u64>>,
}

pub fn parse_corpus(groups: &[SourceGroup], format: FormatSpec) -> Result<Vec<RawDocument>> {
    let mut out = Vec::new();
    for group in groups {
        if group.period.is_empty() {
            return Err(Error::Config(format!(
                "source group {:?} is mapped to no period",
                group.files
            )));
        }
        for path in &group.files {
            let docs = match format {
                FormatSpec::VerticalTsv => parse_vertical(path)?,
                FormatSpec::PlainText => vec![parse_plain(path)?],
            };
            for tokens in docs {
                out.push(RawDocument {
                    tokens,
                    period: group.period.clone(),
                    genre: group.genre.clone(),
                    source: path.display().to_string(),
                });
            }
        }
    }
    Ok(out)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| Error::Ingest {
            path: path.to_path_buf(),
            source,
        })
}

fn parse_vertical(path: &Path) -> Result<Vec<Vec<RawToken>>> {
    let reader = open(path)?;
    let mut docs = Vec::new();
    let mut current: Vec<RawToken> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| Error::Ingest {
            path: path.to_path_buf(),
            source,
        })?;
        if line.starts_with("##") {
            if !current.is_empty() {
                docs.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "expected 3 tab-separated fields (form, lemma, pos), found {}",
                    fields.len()
                ),
            });
        }
        let lemma = fields[1].trim();
        let pos = fields[2].trim();
        current.push(RawToken {
            form: fields[0].trim().to_string(),
            lemma: (!lemma.is_empty() && lemma != "-").then(|| lemma.to_string()),
            pos: (!pos.is_empty()).then(|| pos.to_string()),
        });
    }
    if !current.is_empty() {
        docs.push(current);
    }
    Ok(docs)
}

fn parse_plain(path: &Path) -> Result<Vec<RawToken>> {
    let reader = open(path)?;
    let mut tokens = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|source| Error::Ingest {
            path: path.to_path_buf(),
            source,
        })?;
        for word in line.split_whitespace() {
            tokens.push(RawToken {
                form: word.to_string(),
                lemma: None,
                pos: None,
            });
        }
    }
    Ok(tokens)
}

/// Lowercases, strips `-` and `~`, and replaces digit runs with the
/// placeholder.
fn normalize(form: &str) -> String {
    let mut out = String::with_capacity(form.len());
    let mut in_digits = false;
    for ch in form.chars().flat_map(|c| c.to_lowercase()) {
        if ch.is_ascii_digit() {
            if !in_digits {
                out.push_str(NUM_PLACEHOLDER);
                in_digits = true;
            }
            continue;
        }
        in_digits = false;
        if ch == '-' || ch == '~' {
            continue;
        }
        out.push(ch);
    }
    out
}

/// Applies the cleaning pipeline to one document. Never fails; an empty
/// output document is legal.
pub fn preprocess(doc: &RawDocument, cfg: &FilterConfig) -> CleanTokens {
    let mut tokens = Vec::with_capacity(doc.tokens.len());
    for tok in &doc.tokens {
        // Capitalization is tested on the original surface form.
        if cfg.drop_capitalized && tok.form.chars().next().is_some_and(|c| c.is_uppercase()) {
            continue;
        }
        let tagged = tok.pos.is_some();
        if tagged && !cfg.content_pos.is_empty() {
            let pos = tok.pos.as_deref().unwrap();
            if !FilterConfig::matches_any(&cfg.content_pos, pos) {
                continue;
            }
        }
        let base = if cfg.use_lemma {
            tok.lemma.as_deref().unwrap_or(&tok.form)
        } else {
            &tok.form
        };
        // A token already carrying the target marker keeps it; this makes
        // re-running the pipeline over its own output a no-op.
        let (stem, mut marked) = match base.strip_suffix(TARGET_SUFFIX) {
            Some(stripped) => (stripped, true),
            None => (base, false),
        };
        let stem = normalize(stem);
        if stem.chars().count() < cfg.min_word_len {
            continue;
        }
        if cfg.stopwords.contains(&stem) || cfg.ocr_errors.contains(&stem) {
            continue;
        }
        if tagged {
            let pos = tok.pos.as_deref().unwrap();
            marked |= FilterConfig::matches_any(&cfg.target_pos, pos);
        }
        if marked {
            tokens.push(format!("{stem}{TARGET_SUFFIX}"));
        } else {
            tokens.push(stem);
        }
    }
    CleanTokens {
        period: doc.period.clone(),
        genre: doc.genre.clone(),
        tokens,
    }
}

/// Parallel cleaning over a batch of documents; output order matches input.
pub fn preprocess_all(docs: &[RawDocument], cfg: &FilterConfig) -> Vec<CleanTokens> {
    docs.par_iter().map(|d| preprocess(d, cfg)).collect()
}

/// Groups cleaned documents by period, interning tokens. Periods declared in
/// `order` but absent from the input are kept as empty bins so that series
/// indices stay aligned.
pub fn bin_periods<I>(docs: I, order: &[String]) -> Result<PeriodCorpus>
where
    I: IntoIterator<Item = CleanTokens>,
{
    let mut seen = BTreeSet::new();
    for p in order {
        if !seen.insert(p) {
            return Err(Error::Config(format!("duplicate period id `{p}`")));
        }
    }
    let index: BTreeMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let mut corpus = PeriodCorpus {
        vocab: Vocab::new(),
        periods: order.to_vec(),
        docs: vec![Vec::new(); order.len()],
        token_totals: vec![0; order.len()],
        genre_totals: vec![BTreeMap::new(); order.len()],
    };
    for doc in docs {
        let &slot = index
            .get(doc.period.as_str())
            .ok_or_else(|| Error::Config(format!("unknown period id `{}`", doc.period)))?;
        let tokens: Vec<WordId> = doc
            .tokens
            .iter()
            .map(|t| corpus.vocab.intern(t))
            .collect();
        corpus.token_totals[slot] += tokens.len() as u64;
        if let Some(genre) = &doc.genre {
            *corpus.genre_totals[slot].entry(genre.clone()).or_insert(0) +=
                tokens.len() as u64;
        }
        corpus.docs[slot].push(CleanDocument {
            tokens,
            genre: doc.genre,
        });
    }
    Ok(corpus)
}

impl PeriodCorpus {
    /// A corpus shell with the given period order and no documents.
    pub fn empty(periods: Vec<String>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for p in &periods {
            if !seen.insert(p) {
                return Err(Error::Config(format!("duplicate period id `{p}`")));
            }
        }
        let n = periods.len();
        Ok(Self {
            vocab: Vocab::new(),
            periods,
            docs: vec![Vec::new(); n],
            token_totals: vec![0; n],
            genre_totals: vec![BTreeMap::new(); n],
        })
    }

    /// Appends a document; the caller refreshes totals when done.
    pub fn push_document(&mut self, period_idx: usize, doc: CleanDocument) {
        self.docs[period_idx].push(doc);
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn vocab_mut(&mut self) -> &mut Vocab {
        &mut self.vocab
    }

    pub fn periods(&self) -> &[String] {
        &self.periods
    }

    pub fn period_index(&self, period: &str) -> Option<usize> {
        self.periods.iter().position(|p| p == period)
    }

    pub fn documents(&self, period_idx: usize) -> &[CleanDocument] {
        &self.docs[period_idx]
    }

    pub fn documents_mut(&mut self, period_idx: usize) -> &mut Vec<CleanDocument> {
        &mut self.docs[period_idx]
    }

    pub fn token_total(&self, period_idx: usize) -> u64 {
        self.token_totals[period_idx]
    }

    pub fn genre_totals(&self, period_idx: usize) -> &BTreeMap<String, u64> {
        &self.genre_totals[period_idx]
    }

    /// All genre labels seen anywhere in the corpus.
    pub fn genres(&self) -> BTreeSet<String> {
        self.genre_totals
            .iter()
            .flat_map(|m| m.keys().cloned())
            .collect()
    }

    /// True if any token carries the target-class marker.
    pub fn has_marked_targets(&self) -> bool {
        self.vocab.iter().any(|(_, w)| w.ends_with(TARGET_SUFFIX))
    }

    /// Documents of periods `t-n+1 ..= t`, clamped at the first period; the
    /// merged stream feeds topic estimation only, never frequency counts.
    pub fn concat_window(&self, period_idx: usize, n: usize) -> Vec<&CleanDocument> {
        assert!(n >= 1, "window must cover at least one period");
        let start = (period_idx + 1).saturating_sub(n);
        (start..=period_idx)
            .flat_map(|i| self.docs[i].iter())
            .collect()
    }

    /// The target period together with its predecessor (the first period
    /// stands alone).
    pub fn concat_adjacent(&self, period_idx: usize) -> Vec<&CleanDocument> {
        self.concat_window(period_idx, 2)
    }

    /// Per-(period, genre) token and type counts; documents without a genre
    /// label are reported under an empty genre string.
    pub fn stats(&self) -> Vec<CorpusStatRow> {
        let mut rows = Vec::new();
        for (pi, period) in self.periods.iter().enumerate() {
            let mut by_genre: BTreeMap<&str, (u64, HashSet<WordId>)> = BTreeMap::new();
            for doc in &self.docs[pi] {
                let key = doc.genre.as_deref().unwrap_or("");
                let entry = by_genre.entry(key).or_default();
                entry.0 += doc.tokens.len() as u64;
                entry.1.extend(doc.tokens.iter().copied());
            }
            if by_genre.is_empty() {
                by_genre.insert("", (0, HashSet::new()));
            }
            for (genre, (tokens, types)) in by_genre {
                rows.push(CorpusStatRow {
                    period: period.clone(),
                    genre: genre.to_string(),
                    tokens,
                    types: types.len() as u64,
                });
            }
        }
        rows
    }

    /// Recomputes token and genre totals from the documents. Call after
    /// editing documents in place.
    pub fn refresh_totals(&mut self) {
        for pi in 0..self.periods.len() {
            let mut total = 0;
            let mut genres: BTreeMap<String, u64> = BTreeMap::new();
            for doc in &self.docs[pi] {
                total += doc.tokens.len() as u64;
                if let Some(g) = &doc.genre {
                    *genres.entry(g.clone()).or_insert(0) += doc.tokens.len() as u64;
                }
            }
            self.token_totals[pi] = total;
            self.genre_totals[pi] = genres;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStatRow {
    pub period: String,
    pub genre: String,
    pub tokens: u64,
    pub types: u64,
}
