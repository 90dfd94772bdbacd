//! Windowed, distance-weighted co-occurrence counting, PPMI weighting,
//! top-m topic vectors, and the APSyn rank similarity.
//!
//! Counting happens over cleaned token streams (stop words are removed
//! before windowing) and never crosses document boundaries. Cell weights
//! are (window - d + 1)/window for a pair at distance d; internally they
//! are accumulated as integer multiples of 1/window, which makes parallel
//! merging exact and the result independent of document order.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CleanDocument, TARGET_SUFFIX};
use crate::error::{Error, Result};
use crate::vocab::{Vocab, WordId};

/// Which words become matrix rows (advection targets).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetSelector {
    /// Every threshold-passing word.
    All,
    /// Only words carrying the target-class marker.
    MarkedOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoocConfig {
    pub window: u32,
    pub threshold: u64,
    pub targets: TargetSelector,
}

impl Default for CoocConfig {
    fn default() -> Self {
        Self {
            window: 10,
            threshold: 100,
            targets: TargetSelector::All,
        }
    }
}

/// Sparse weighted co-occurrence counts with row/column marginals.
#[derive(Debug, Clone)]
pub struct CooccurrenceMatrix {
    window: u32,
    /// Period (or concatenation) label, used in diagnostics.
    pub label: String,
    cells: HashMap<(WordId, WordId), u64>,
    row_sums: HashMap<WordId, u64>,
    col_sums: HashMap<WordId, u64>,
    total_units: u64,
}

impl CooccurrenceMatrix {
    /// Weighted count for a (target, context) cell.
    pub fn weight(&self, row: WordId, col: WordId) -> f64 {
        self.cells
            .get(&(row, col))
            .map_or(0.0, |&u| u as f64 / self.window as f64)
    }

    pub fn has_row(&self, row: WordId) -> bool {
        self.row_sums.contains_key(&row)
    }

    pub fn rows(&self) -> impl Iterator<Item = WordId> + '_ {
        self.row_sums.keys().copied()
    }

    pub fn grand_total(&self) -> f64 {
        self.total_units as f64 / self.window as f64
    }

    /// Builds a matrix directly from integer unit counts (one unit is
    /// 1/window of weight), bypassing window enumeration. Intended for
    /// tests and for loading externally computed matrices.
    pub fn from_unit_cells(window: u32, cells: &[((WordId, WordId), u64)]) -> Self {
        let mut m = Self {
            window,
            label: String::new(),
            cells: cells.iter().copied().collect(),
            row_sums: HashMap::new(),
            col_sums: HashMap::new(),
            total_units: 0,
        };
        for (&(r, c), &u) in &m.cells {
            *m.row_sums.entry(r).or_insert(0) += u;
            *m.col_sums.entry(c).or_insert(0) += u;
            m.total_units += u;
        }
        m
    }
}

/// Counts co-occurrences over `docs`. Rows and contexts are restricted to
/// words whose raw frequency in this stream reaches `threshold`; rows may
/// additionally be restricted to marked target-class words.
pub fn build_cooccurrence(
    docs: &[&CleanDocument],
    vocab: &Vocab,
    cfg: &CoocConfig,
    label: &str,
) -> Result<CooccurrenceMatrix> {
    if cfg.window < 1 {
        return Err(Error::Config(format!(
            "context window must be at least 1, got {}",
            cfg.window
        )));
    }
    // Raw frequencies over this stream decide eligibility.
    let mut freq: HashMap<WordId, u64> = HashMap::new();
    for doc in docs {
        for &t in &doc.tokens {
            *freq.entry(t).or_insert(0) += 1;
        }
    }
    let eligible: HashMap<WordId, bool> = freq
        .iter()
        .filter(|(_, &n)| n >= cfg.threshold)
        .map(|(&id, _)| {
            let is_row = match cfg.targets {
                TargetSelector::All => true,
                TargetSelector::MarkedOnly => vocab.word(id).ends_with(TARGET_SUFFIX),
            };
            (id, is_row)
        })
        .collect();

    let window = cfg.window as usize;
    let cells = docs
        .par_iter()
        .fold(
            HashMap::<(WordId, WordId), u64>::new,
            |mut acc, doc| {
                let toks = &doc.tokens;
                for i in 0..toks.len() {
                    let a = toks[i];
                    let Some(&a_row) = eligible.get(&a) else {
                        continue;
                    };
                    let end = (i + window).min(toks.len().saturating_sub(1));
                    for (offset, &b) in toks[i + 1..=end].iter().enumerate() {
                        let Some(&b_row) = eligible.get(&b) else {
                            continue;
                        };
                        let distance = offset as u64 + 1;
                        let units = cfg.window as u64 - distance + 1;
                        if a_row {
                            *acc.entry((a, b)).or_insert(0) += units;
                        }
                        if b_row {
                            *acc.entry((b, a)).or_insert(0) += units;
                        }
                    }
                }
                acc
            },
        )
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let mut matrix = CooccurrenceMatrix {
        window: cfg.window,
        label: label.to_string(),
        cells,
        row_sums: HashMap::new(),
        col_sums: HashMap::new(),
        total_units: 0,
    };
    for (&(r, c), &u) in &matrix.cells {
        *matrix.row_sums.entry(r).or_insert(0) += u;
        *matrix.col_sums.entry(c).or_insert(0) += u;
        matrix.total_units += u;
    }
    Ok(matrix)
}

/// PPMI-weighted rows: only strictly positive weights are stored.
#[derive(Debug, Clone)]
pub struct PpmiMatrix {
    pub label: String,
    rows: HashMap<WordId, Vec<(WordId, f64)>>,
}

impl PpmiMatrix {
    pub fn weight(&self, row: WordId, col: WordId) -> f64 {
        self.rows.get(&row).map_or(0.0, |r| {
            r.iter()
                .find(|(c, _)| *c == col)
                .map_or(0.0, |(_, w)| *w)
        })
    }

    pub fn has_row(&self, row: WordId) -> bool {
        self.rows.contains_key(&row)
    }

    pub fn rows(&self) -> impl Iterator<Item = WordId> + '_ {
        self.rows.keys().copied()
    }

    pub fn row(&self, row: WordId) -> Option<&[(WordId, f64)]> {
        self.rows.get(&row).map(|r| r.as_slice())
    }
}

/// max{log2[P(w,c) / (P(w) P(c))], 0} per cell, probabilities taken from the
/// weighted counts and their marginals.
pub fn ppmi(matrix: &CooccurrenceMatrix) -> PpmiMatrix {
    let total = matrix.total_units as f64;
    let mut grouped: HashMap<WordId, Vec<(WordId, u64)>> = HashMap::new();
    for (&(r, c), &units) in &matrix.cells {
        grouped.entry(r).or_default().push((c, units));
    }
    let rows: HashMap<WordId, Vec<(WordId, f64)>> = grouped
        .into_par_iter()
        .map(|(r, cells)| {
            let row_sum = matrix.row_sums[&r] as f64;
            let mut out: Vec<(WordId, f64)> = cells
                .into_iter()
                .filter_map(|(c, units)| {
                    let col_sum = matrix.col_sums[&c] as f64;
                    let ratio = units as f64 * total / (row_sum * col_sum);
                    let value = ratio.log2();
                    (value > 0.0).then_some((c, value))
                })
                .collect();
            out.sort_unstable_by_key(|(c, _)| *c);
            (r, out)
        })
        .collect();
    PpmiMatrix {
        label: matrix.label.clone(),
        rows,
    }
}

/// A target word's topic: its top-m context words by PPMI weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicVector {
    pub target: String,
    pub period: String,
    /// (context word, weight), weights strictly positive and non-increasing.
    pub contexts: Vec<(String, f64)>,
}

/// Extracts the top-m contexts of `target`, ties broken lexicographically.
/// The target itself is never among its contexts.
pub fn topic_vector(
    matrix: &PpmiMatrix,
    vocab: &Vocab,
    target: WordId,
    m: usize,
) -> Result<TopicVector> {
    let row = matrix.row(target).ok_or_else(|| Error::BelowThreshold {
        word: vocab.word(target).to_string(),
        period: matrix.label.clone(),
    })?;
    let mut entries: Vec<(&str, f64)> = row
        .iter()
        .filter(|(c, _)| *c != target)
        .map(|&(c, w)| (vocab.word(c), w))
        .collect();
    entries.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    entries.truncate(m);
    Ok(TopicVector {
        target: vocab.word(target).to_string(),
        period: matrix.label.clone(),
        contexts: entries
            .into_iter()
            .map(|(w, v)| (w.to_string(), v))
            .collect(),
    })
}

/// Rank-based similarity of two topics: the sum over shared context words
/// of 1 / mean(rank_a, rank_b), ranks starting at 1.
pub fn apsyn(a: &TopicVector, b: &TopicVector) -> Result<f64> {
    if a.contexts.is_empty() || b.contexts.is_empty() {
        return Err(Error::Domain(
            "APSyn requires non-empty topic vectors".into(),
        ));
    }
    let ranks_b: HashMap<&str, usize> = b
        .contexts
        .iter()
        .enumerate()
        .map(|(i, (w, _))| (w.as_str(), i + 1))
        .collect();
    let mut sum = 0.0;
    for (i, (w, _)) in a.contexts.iter().enumerate() {
        if let Some(&rb) = ranks_b.get(w.as_str()) {
            sum += 2.0 / (i + 1 + rb) as f64;
        }
    }
    Ok(sum)
}
