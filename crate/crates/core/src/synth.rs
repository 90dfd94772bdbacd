//! Seeded synthetic diachronic corpora: topic-mixture generation, synonym
//! injection on a replacement schedule, and within-period token shuffling.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::corpus::{CleanDocument, PeriodCorpus};
use crate::error::{Error, Result};
use crate::vocab::WordId;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicSpec {
    pub name: String,
    /// Word distribution; weights need not be normalized.
    pub words: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum DocLength {
    Fixed(usize),
    /// Inclusive bounds.
    Uniform(usize, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub periods: Vec<String>,
    pub topics: Vec<TopicSpec>,
    /// `weights[period][topic]`, each row summing to 1.
    pub weights: Vec<Vec<f64>>,
    pub docs_per_period: usize,
    pub doc_len: DocLength,
    /// Tokens drawn per topic draw; co-occurrence structure comes from
    /// blocks of same-topic words inside documents.
    pub block_len: usize,
    pub seed: u64,
    /// Label each document with its dominant topic's name as the genre.
    pub label_genres: bool,
}

/// Per-token topic indices, parallel to the generated documents.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub labels: Vec<Vec<Vec<u16>>>,
}

fn cumulative(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::Config("empty weight vector".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Config("weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Config("weights must sum to a positive value".into()));
    }
    let mut acc = 0.0;
    Ok(weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect())
}

fn draw(cum: &[f64], rng: &mut StdRng) -> usize {
    let u: f64 = rng.random();
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Samples a corpus from the mixture. Deterministic for a given seed.
pub fn generate_mixture(spec: &MixtureSpec) -> Result<(PeriodCorpus, GroundTruth)> {
    if spec.weights.len() != spec.periods.len() {
        return Err(Error::Config(
            "one mixture weight row per period is required".into(),
        ));
    }
    if spec.block_len == 0 {
        return Err(Error::Config("block length must be positive".into()));
    }
    for row in &spec.weights {
        if row.len() != spec.topics.len() {
            return Err(Error::Config(
                "each weight row needs one entry per topic".into(),
            ));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "mixture weights must sum to 1, got {sum}"
            )));
        }
    }

    let mut corpus = PeriodCorpus::empty(spec.periods.clone())?;
    // Intern every topic word up front; token sampling then stays id-only.
    let topic_words: Vec<Vec<WordId>> = spec
        .topics
        .iter()
        .map(|t| {
            t.words
                .iter()
                .map(|(w, _)| corpus.vocab_mut().intern(w))
                .collect()
        })
        .collect();
    let topic_cums: Vec<Vec<f64>> = spec
        .topics
        .iter()
        .map(|t| cumulative(&t.words.iter().map(|(_, w)| *w).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let weight_cums: Vec<Vec<f64>> = spec
        .weights
        .iter()
        .map(|row| cumulative(row))
        .collect::<Result<_>>()?;

    let mut rng = StdRng::seed_from_u64(spec.seed);
    let mut truth = GroundTruth {
        labels: vec![Vec::new(); spec.periods.len()],
    };
    for (pi, weight_cum) in weight_cums.iter().enumerate() {
        for _ in 0..spec.docs_per_period {
            let len = match spec.doc_len {
                DocLength::Fixed(n) => n,
                DocLength::Uniform(lo, hi) => rng.random_range(lo..=hi),
            };
            let mut tokens = Vec::with_capacity(len);
            let mut labels = Vec::with_capacity(len);
            let mut topic_counts = vec![0usize; spec.topics.len()];
            while tokens.len() < len {
                let topic = draw(weight_cum, &mut rng);
                let block = spec.block_len.min(len - tokens.len());
                topic_counts[topic] += block;
                for _ in 0..block {
                    let w = draw(&topic_cums[topic], &mut rng);
                    tokens.push(topic_words[topic][w]);
                    labels.push(topic as u16);
                }
            }
            let genre = spec.label_genres.then(|| {
                let best = topic_counts
                    .iter()
                    .enumerate()
                    .max_by_key(|(i, &n)| (n, usize::MAX - i))
                    .map(|(i, _)| i)
                    .unwrap();
                spec.topics[best].name.clone()
            });
            corpus.push_document(pi, CleanDocument { tokens, genre });
            truth.labels[pi].push(labels);
        }
    }
    corpus.refresh_totals();
    Ok((corpus, truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScheduleShape {
    Linear,
    SCurve { steepness: f64 },
    Custom,
}

/// Replacement plan: at each period, the given fraction of the word's
/// occurrences is replaced by the synonym.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplacementSchedule {
    pub word: String,
    pub synonym: String,
    pub shape: ScheduleShape,
    /// (period id, fraction in [0,1]).
    pub proportions: Vec<(String, f64)>,
}

impl ReplacementSchedule {
    /// 0 at the first period rising evenly to 1 at the last.
    pub fn linear(word: &str, synonym: &str, periods: &[String]) -> Self {
        let n = periods.len().max(2) - 1;
        Self {
            word: word.into(),
            synonym: synonym.into(),
            shape: ScheduleShape::Linear,
            proportions: periods
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), i as f64 / n as f64))
                .collect(),
        }
    }

    /// Logistic ramp rescaled to hit exactly 0 and 1 at the endpoints.
    pub fn s_curve(word: &str, synonym: &str, periods: &[String], steepness: f64) -> Self {
        let n = periods.len();
        let mid = (n as f64 - 1.0) / 2.0;
        let logistic = |i: f64| 1.0 / (1.0 + (-steepness * (i - mid)).exp());
        let lo = logistic(0.0);
        let hi = logistic(n as f64 - 1.0);
        Self {
            word: word.into(),
            synonym: synonym.into(),
            shape: ScheduleShape::SCurve { steepness },
            proportions: periods
                .iter()
                .enumerate()
                .map(|(i, p)| (p.clone(), (logistic(i as f64) - lo) / (hi - lo)))
                .collect(),
        }
    }

    pub fn custom(word: &str, synonym: &str, proportions: Vec<(String, f64)>) -> Self {
        Self {
            word: word.into(),
            synonym: synonym.into(),
            shape: ScheduleShape::Custom,
            proportions,
        }
    }
}

/// Number of replacements for `n` occurrences at fraction `p`: nearest
/// integer, half up.
pub fn replacement_count(p: f64, n: usize) -> usize {
    ((p * n as f64) + 0.5).floor() as usize
}

/// Replaces a seeded uniform sample of the word's occurrences with the
/// synonym, period by period. Token totals and the combined count of
/// {word, synonym} are conserved.
pub fn inject_synonym(
    mut corpus: PeriodCorpus,
    schedule: &ReplacementSchedule,
    seed: u64,
) -> Result<PeriodCorpus> {
    let word = corpus
        .vocab()
        .get(&schedule.word)
        .ok_or_else(|| Error::Config(format!("word `{}` not in corpus", schedule.word)))?;
    if corpus.vocab().contains(&schedule.synonym) {
        return Err(Error::Config(format!(
            "synonym `{}` collides with an existing token",
            schedule.synonym
        )));
    }
    for (_, p) in &schedule.proportions {
        if !(0.0..=1.0).contains(p) {
            return Err(Error::Config(format!("fraction {p} outside [0, 1]")));
        }
    }
    let synonym = corpus.vocab_mut().intern(&schedule.synonym);
    let mut rng = StdRng::seed_from_u64(seed);
    for (period, p) in &schedule.proportions {
        let pi = corpus
            .period_index(period)
            .ok_or_else(|| Error::Config(format!("unknown period id `{period}`")))?;
        let mut positions: Vec<(usize, usize)> = Vec::new();
        for (di, doc) in corpus.documents(pi).iter().enumerate() {
            for (ti, &tok) in doc.tokens.iter().enumerate() {
                if tok == word {
                    positions.push((di, ti));
                }
            }
        }
        let k = replacement_count(*p, positions.len());
        positions.shuffle(&mut rng);
        for &(di, ti) in positions.iter().take(k) {
            corpus.documents_mut(pi)[di].tokens[ti] = synonym;
        }
    }
    corpus.refresh_totals();
    Ok(corpus)
}

/// Uniformly permutes the position of every token in the period, across
/// document boundaries. The token multiset (and with it every unigram
/// frequency) is preserved exactly; only co-occurrence structure changes.
pub fn shuffle_period(mut corpus: PeriodCorpus, period: &str, seed: u64) -> Result<PeriodCorpus> {
    let pi = corpus
        .period_index(period)
        .ok_or_else(|| Error::Config(format!("unknown period id `{period}`")))?;
    let mut pool: Vec<WordId> = corpus
        .documents(pi)
        .iter()
        .flat_map(|d| d.tokens.iter().copied())
        .collect();
    let mut rng = StdRng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut offset = 0;
    for doc in corpus.documents_mut(pi) {
        let len = doc.tokens.len();
        doc.tokens.copy_from_slice(&pool[offset..offset + len]);
        offset += len;
    }
    corpus.refresh_totals();
    Ok(corpus)
}

/// Letters-only vocabulary item: prefix plus a base-26 suffix. Generated
/// corpora round-trip through the cleaning pipeline, so synthetic words must
/// not contain digits (digit runs get replaced by a placeholder there).
pub fn indexed_word(prefix: &str, i: usize) -> String {
    let mut n = i;
    let mut suffix = [b'a'; 3];
    for slot in suffix.iter_mut().rev() {
        *slot = b'a' + (n % 26) as u8;
        n /= 26;
    }
    format!("{prefix}{}", std::str::from_utf8(&suffix).unwrap())
}

/// Raw count of every word in one period; test and diagnostics helper.
pub fn unigram_counts(corpus: &PeriodCorpus, period_idx: usize) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for doc in corpus.documents(period_idx) {
        for &tok in &doc.tokens {
            *counts
                .entry(corpus.vocab().word(tok).to_string())
                .or_insert(0) += 1;
        }
    }
    counts
}
