//! The advection measure: weighted mean log frequency change of a word's
//! topic, full per-corpus advection series for both the PPMI and LDA
//! variants, descriptive-power evaluation, and genre divergence.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooccurrence::{
    build_cooccurrence, ppmi, topic_vector, CoocConfig, TargetSelector, TopicVector,
};
use crate::corpus::{PeriodCorpus, TARGET_SUFFIX};
use crate::counts::{log_change, FrequencyTable};
use crate::error::{Error, Result};
use crate::lda::{lda_advection, train_lda, LdaParams};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Ppmi,
    Lda,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Ppmi => write!(f, "ppmi"),
            Variant::Lda => write!(f, "lda"),
        }
    }
}

/// Corpus smoothing for topic estimation. Word counts always come from the
/// target period alone; smoothing only widens the text the topics are
/// estimated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothing {
    None,
    /// Concatenate the target period with its predecessor.
    Adjacent,
    /// Concatenate the last n periods up to the target.
    Window(usize),
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Smoothing::None => write!(f, "none"),
            Smoothing::Adjacent => write!(f, "adjacent"),
            Smoothing::Window(n) => write!(f, "window:{n}"),
        }
    }
}

/// Which words get advection records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetScope {
    /// Marked target-class words when the corpus has any, otherwise all.
    Auto,
    MarkedOnly,
    All,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdvectionConfig {
    pub variant: Variant,
    pub smoothing: Smoothing,
    pub window: u32,
    pub m: usize,
    pub threshold: u64,
    pub targets: TargetScope,
    /// Sampler settings for the LDA variant; `lda.threshold` is overridden
    /// by `threshold` so both variants see the same vocabulary.
    pub lda: LdaParams,
}

impl Default for AdvectionConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Ppmi,
            smoothing: Smoothing::None,
            window: 10,
            m: 75,
            threshold: 100,
            targets: TargetScope::Auto,
            lda: LdaParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvectionRecord {
    pub word: String,
    /// The later period of the change pair.
    pub period: String,
    pub log_change: f64,
    pub advection: f64,
    pub variant: Variant,
    pub smoothing: Smoothing,
}

/// sum(x_i w_i) / sum(w_i).
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Result<f64> {
    assert_eq!(values.len(), weights.len(), "weighted_mean: length mismatch");
    if values.is_empty() {
        return Err(Error::Domain("weighted mean of an empty set".into()));
    }
    let wsum: f64 = weights.iter().sum();
    if wsum <= 0.0 {
        return Err(Error::Domain(
            "weighted mean requires a positive weight total".into(),
        ));
    }
    let dot: f64 = values.iter().zip(weights).map(|(x, w)| x * w).sum();
    Ok(dot / wsum)
}

/// PPMI-weighted mean of the topic's context-word log changes. Context
/// words missing from the change map count as unchanged (0).
pub fn ppmi_advection(topic: &TopicVector, changes: &HashMap<String, f64>) -> Result<f64> {
    if topic.contexts.is_empty() {
        return Err(Error::Domain(format!(
            "`{}` has an empty topic in {}",
            topic.target, topic.period
        )));
    }
    let values: Vec<f64> = topic
        .contexts
        .iter()
        .map(|(w, _)| changes.get(w).copied().unwrap_or(0.0))
        .collect();
    let weights: Vec<f64> = topic.contexts.iter().map(|(_, w)| *w).collect();
    weighted_mean(&values, &weights)
}

/// Innovation-mode advection: context words that do not occur at all in the
/// evaluated period pair are excluded, so 0-to-0 changes cannot pull the
/// value toward zero. Returns `Ok(None)` when no context word participates.
pub fn ppmi_advection_participating<F>(topic: &TopicVector, change_of: F) -> Result<Option<f64>>
where
    F: Fn(&str) -> Option<f64>,
{
    if topic.contexts.is_empty() {
        return Err(Error::Domain(format!(
            "`{}` has an empty topic in {}",
            topic.target, topic.period
        )));
    }
    let mut values = Vec::new();
    let mut weights = Vec::new();
    for (w, weight) in &topic.contexts {
        if let Some(change) = change_of(w) {
            values.push(change);
            weights.push(*weight);
        }
    }
    if values.is_empty() || weights.iter().sum::<f64>() <= 0.0 {
        return Ok(None);
    }
    Ok(Some(weighted_mean(&values, &weights)?))
}

fn wants_marked(corpus: &PeriodCorpus, scope: TargetScope) -> bool {
    match scope {
        TargetScope::MarkedOnly => true,
        TargetScope::All => false,
        TargetScope::Auto => corpus.has_marked_targets(),
    }
}

/// Log change of every table word between `prev` and `curr`, keyed by word.
pub fn change_map(table: &FrequencyTable, prev: usize, curr: usize) -> HashMap<String, f64> {
    let unit_prev = table.smoothing_unit(prev);
    let unit_curr = table.smoothing_unit(curr);
    table
        .words_sorted()
        .into_iter()
        .map(|id| {
            let change = log_change(
                table.pmw_by_id(id, prev),
                table.pmw_by_id(id, curr),
                unit_prev,
                unit_curr,
            )
            .expect("pmw values are nonnegative");
            (table.word(id).to_string(), change)
        })
        .collect()
}

/// One advection record per eligible (word, period pair). Topics are
/// re-estimated for every pair. Without smoothing a word is eligible when
/// it meets the threshold in both periods of the pair; with smoothing the
/// threshold applies to the concatenated estimation stream.
pub fn advection_series(
    corpus: &PeriodCorpus,
    table: &FrequencyTable,
    cfg: &AdvectionConfig,
) -> Result<Vec<AdvectionRecord>> {
    let n_periods = corpus.periods().len();
    if n_periods < 2 {
        return Err(Error::Domain(
            "advection needs at least two periods".into(),
        ));
    }
    let marked_only = wants_marked(corpus, cfg.targets);
    let mut records = Vec::new();
    for t in 1..n_periods {
        let (docs, label) = match cfg.smoothing {
            Smoothing::None => (corpus.concat_window(t, 1), corpus.periods()[t].clone()),
            Smoothing::Adjacent => (corpus.concat_adjacent(t), corpus.periods()[t].clone()),
            Smoothing::Window(n) => (corpus.concat_window(t, n), corpus.periods()[t].clone()),
        };
        let changes = change_map(table, t - 1, t);
        match cfg.variant {
            Variant::Ppmi => {
                let cooc_cfg = CoocConfig {
                    window: cfg.window,
                    threshold: cfg.threshold,
                    targets: if marked_only {
                        TargetSelector::MarkedOnly
                    } else {
                        TargetSelector::All
                    },
                };
                let matrix = build_cooccurrence(&docs, corpus.vocab(), &cooc_cfg, &label)?;
                let weighted = ppmi(&matrix);
                let mut rows: Vec<_> = weighted.rows().collect();
                rows.sort_by(|a, b| corpus.vocab().word(*a).cmp(corpus.vocab().word(*b)));
                let pair_records: Vec<AdvectionRecord> = rows
                    .par_iter()
                    .filter_map(|&row| {
                        let word = corpus.vocab().word(row);
                        if cfg.smoothing == Smoothing::None
                            && (table.raw(word, t - 1) < cfg.threshold
                                || table.raw(word, t) < cfg.threshold)
                        {
                            return None;
                        }
                        let topic = topic_vector(&weighted, corpus.vocab(), row, cfg.m).ok()?;
                        if topic.contexts.is_empty() {
                            return None;
                        }
                        let advection = ppmi_advection(&topic, &changes).ok()?;
                        Some(AdvectionRecord {
                            word: word.to_string(),
                            period: label.clone(),
                            log_change: *changes.get(word)?,
                            advection,
                            variant: cfg.variant,
                            smoothing: cfg.smoothing,
                        })
                    })
                    .collect();
                records.extend(pair_records);
            }
            Variant::Lda => {
                let params = LdaParams {
                    threshold: cfg.threshold,
                    // Decorrelate per-pair initializations while keeping the
                    // whole series a function of the configured seed.
                    seed: cfg.lda.seed.wrapping_add(t as u64),
                    ..cfg.lda.clone()
                };
                let model = train_lda(&docs, corpus.vocab(), &params)?;
                let model_changes: Vec<f64> = model
                    .words()
                    .iter()
                    .map(|w| changes.get(w).copied().unwrap_or(0.0))
                    .collect();
                for word in model.words() {
                    if marked_only && !word.ends_with(TARGET_SUFFIX) {
                        continue;
                    }
                    if cfg.smoothing == Smoothing::None
                        && (table.raw(word, t - 1) < cfg.threshold
                            || table.raw(word, t) < cfg.threshold)
                    {
                        continue;
                    }
                    let advection = lda_advection(&model, &model_changes, word)?;
                    records.push(AdvectionRecord {
                        word: word.clone(),
                        period: label.clone(),
                        log_change: changes.get(word).copied().unwrap_or(0.0),
                        advection,
                        variant: cfg.variant,
                        smoothing: cfg.smoothing,
                    });
                }
            }
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    PerPeriod,
    Pooled,
}

/// Regression of log change on advection for one record group. `r2` and `p`
/// are None for degenerate groups (fewer than three records or zero
/// variance in either variable).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupEval {
    pub group: String,
    pub n: usize,
    pub r2: Option<f64>,
    pub p: Option<f64>,
    pub slope: Option<f64>,
}

pub fn eval_r2(records: &[AdvectionRecord], grouping: Grouping) -> Vec<GroupEval> {
    let mut groups: BTreeMap<String, Vec<&AdvectionRecord>> = BTreeMap::new();
    for r in records {
        let key = match grouping {
            Grouping::PerPeriod => r.period.clone(),
            Grouping::Pooled => "pooled".to_string(),
        };
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(group, rs)| {
            let x: Vec<f64> = rs.iter().map(|r| r.advection).collect();
            let y: Vec<f64> = rs.iter().map(|r| r.log_change).collect();
            match stats::ols(&x, &y) {
                Some(fit) => GroupEval {
                    group,
                    n: rs.len(),
                    r2: Some(fit.r2),
                    p: Some(fit.p_slope),
                    slope: Some(fit.slope),
                },
                None => GroupEval {
                    group,
                    n: rs.len(),
                    r2: None,
                    p: None,
                    slope: None,
                },
            }
        })
        .collect()
}

/// Genre token counts for one period; zero counts over the declared support
/// are incremented by 1 so divergences stay finite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenreDistribution {
    pub period: String,
    counts: BTreeMap<String, u64>,
}

impl GenreDistribution {
    pub fn new(period: &str, counts: BTreeMap<String, u64>) -> Self {
        Self {
            period: period.to_string(),
            counts: counts
                .into_iter()
                .map(|(g, c)| (g, c.max(1)))
                .collect(),
        }
    }

    /// Reads the period's genre totals over the full genre support of the
    /// corpus, so distributions from different periods stay comparable.
    pub fn from_corpus(corpus: &PeriodCorpus, period_idx: usize) -> Self {
        let support: BTreeSet<String> = corpus.genres();
        let totals = corpus.genre_totals(period_idx);
        let counts = support
            .into_iter()
            .map(|g| {
                let c = totals.get(&g).copied().unwrap_or(0);
                (g, c)
            })
            .collect();
        Self::new(&corpus.periods()[period_idx], counts)
    }

    pub fn probabilities(&self) -> BTreeMap<&str, f64> {
        let total: u64 = self.counts.values().sum();
        self.counts
            .iter()
            .map(|(g, &c)| (g.as_str(), c as f64 / total as f64))
            .collect()
    }
}

/// KL(p || q) with natural log.
pub fn genre_divergence(p: &GenreDistribution, q: &GenreDistribution) -> Result<f64> {
    let pp = p.probabilities();
    let qp = q.probabilities();
    if pp.keys().ne(qp.keys()) {
        return Err(Error::Domain(format!(
            "genre sets differ between {} and {}",
            p.period, q.period
        )));
    }
    Ok(pp
        .iter()
        .map(|(g, &pi)| pi * (pi / qp[g]).ln())
        .sum())
}
