//! Word frequency accounting per period, per-million normalization, and
//! log frequency change with the zero-smoothing rule.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{PeriodCorpus, TARGET_SUFFIX};
use crate::error::{Error, Result};
use crate::vocab::{Vocab, WordId};

/// Which tokens get table entries. Period totals always come from the full
/// retained-token stream, so pmw values stay comparable across classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenClass {
    All,
    /// Only tokens carrying the target-class marker.
    Targets,
}

/// Per-(word, period) raw counts plus period totals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrequencyTable {
    periods: Vec<String>,
    totals: Vec<u64>,
    counts: HashMap<WordId, Vec<u64>>,
    vocab: Vocab,
}

/// Counts tokens matching `class` in every period of the corpus.
pub fn count_frequencies(corpus: &PeriodCorpus, class: TokenClass) -> FrequencyTable {
    let n = corpus.periods().len();
    let mut counts: HashMap<WordId, Vec<u64>> = HashMap::new();
    for pi in 0..n {
        for doc in corpus.documents(pi) {
            for &tok in &doc.tokens {
                if class == TokenClass::Targets
                    && !corpus.vocab().word(tok).ends_with(TARGET_SUFFIX)
                {
                    continue;
                }
                counts.entry(tok).or_insert_with(|| vec![0; n])[pi] += 1;
            }
        }
    }
    let mut vocab = corpus.vocab().clone();
    vocab.rebuild_index();
    FrequencyTable {
        periods: corpus.periods().to_vec(),
        totals: (0..n).map(|i| corpus.token_total(i)).collect(),
        counts,
        vocab,
    }
}

impl FrequencyTable {
    pub fn periods(&self) -> &[String] {
        &self.periods
    }

    pub fn total(&self, period_idx: usize) -> u64 {
        self.totals[period_idx]
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocab.get(word).is_some_and(|id| self.counts.contains_key(&id))
    }

    pub fn word_id(&self, word: &str) -> Option<WordId> {
        self.vocab.get(word)
    }

    pub fn word(&self, id: WordId) -> &str {
        self.vocab.word(id)
    }

    pub fn raw_by_id(&self, id: WordId, period_idx: usize) -> u64 {
        self.counts.get(&id).map_or(0, |c| c[period_idx])
    }

    pub fn raw(&self, word: &str, period_idx: usize) -> u64 {
        self.vocab
            .get(word)
            .map_or(0, |id| self.raw_by_id(id, period_idx))
    }

    pub fn pmw_by_id(&self, id: WordId, period_idx: usize) -> f64 {
        let total = self.totals[period_idx];
        if total == 0 {
            return 0.0;
        }
        self.raw_by_id(id, period_idx) as f64 * 1e6 / total as f64
    }

    pub fn pmw(&self, word: &str, period_idx: usize) -> f64 {
        self.vocab
            .get(word)
            .map_or(0.0, |id| self.pmw_by_id(id, period_idx))
    }

    /// The pmw value equivalent to one raw occurrence in this period; it is
    /// substituted for a zero frequency inside log change. An empty period
    /// falls back to a total of one token so the unit stays finite.
    pub fn smoothing_unit(&self, period_idx: usize) -> f64 {
        1e6 / self.totals[period_idx].max(1) as f64
    }

    /// Words with a table entry, sorted lexicographically.
    pub fn words_sorted(&self) -> Vec<WordId> {
        let mut ids: Vec<WordId> = self.counts.keys().copied().collect();
        ids.sort_by(|a, b| self.vocab.word(*a).cmp(self.vocab.word(*b)));
        ids
    }

    /// Log change of `word` between every successive period pair; the result
    /// has one entry per pair, labeled with the later period.
    pub fn change_series(&self, word: &str) -> Result<Vec<(String, f64)>> {
        let id = self
            .vocab
            .get(word)
            .filter(|id| self.counts.contains_key(id))
            .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        let mut out = Vec::with_capacity(self.periods.len().saturating_sub(1));
        for t in 1..self.periods.len() {
            let change = log_change(
                self.pmw_by_id(id, t - 1),
                self.pmw_by_id(id, t),
                self.smoothing_unit(t - 1),
                self.smoothing_unit(t),
            )?;
            out.push((self.periods[t].clone(), change));
        }
        Ok(out)
    }

    #[cfg(test)]
    pub(crate) fn from_parts(
        periods: Vec<String>,
        totals: Vec<u64>,
        entries: &[(&str, Vec<u64>)],
    ) -> Self {
        let mut vocab = Vocab::new();
        let counts = entries
            .iter()
            .map(|(w, c)| (vocab.intern(w), c.clone()))
            .collect();
        Self {
            periods,
            totals,
            counts,
            vocab,
        }
    }
}

/// ln(f_curr + s_curr) - ln(f_prev + s_prev), where each side's smoothing
/// term is zero when that side's frequency is positive and that period's
/// one-occurrence unit when it is zero. Exactly zero when both sides are.
pub fn log_change(f_prev: f64, f_curr: f64, unit_prev: f64, unit_curr: f64) -> Result<f64> {
    if f_prev < 0.0 || f_curr < 0.0 {
        return Err(Error::Domain(format!(
            "log change requires nonnegative frequencies, got ({f_prev}, {f_curr})"
        )));
    }
    if f_prev == 0.0 && f_curr == 0.0 {
        return Ok(0.0);
    }
    let prev = if f_prev > 0.0 { f_prev } else { unit_prev };
    let curr = if f_curr > 0.0 { f_curr } else { unit_curr };
    Ok(curr.ln() - prev.ln())
}

/// All four change measures of the comparison table; kept for reproducing
/// reference arithmetic, the model itself uses natural log change only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangeMeasures {
    pub absolute: f64,
    /// None when the starting value is zero.
    pub percent: Option<f64>,
    pub ln: f64,
    pub log10: f64,
}

pub fn change_measures(v1: f64, v2: f64) -> Result<ChangeMeasures> {
    if v1 < 0.0 || v2 < 0.0 {
        return Err(Error::Domain(format!(
            "change measures require nonnegative values, got ({v1}, {v2})"
        )));
    }
    Ok(ChangeMeasures {
        absolute: v2 - v1,
        percent: (v1 > 0.0).then(|| (v2 - v1) / v1 * 100.0),
        ln: (v2 / v1).ln(),
        log10: (v2 / v1).log10(),
    })
}
