//! Latent Dirichlet Allocation via collapsed Gibbs sampling, trained per
//! period on the thresholded vocabulary, plus the LDA-based advection
//! variant. Sampling is single-threaded so a seed fully determines the
//! trained model.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::corpus::CleanDocument;
use crate::error::{Error, Result};
use crate::vocab::Vocab;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Stop early when the per-sweep reassignment fraction drops below this.
    pub convergence: f64,
    /// Minimum raw frequency in the training stream for a word to enter the
    /// model vocabulary.
    pub threshold: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self {
            k: 500,
            alpha: 0.1,
            beta: 0.1,
            max_iters: 5000,
            seed: 0,
            convergence: 0.001,
            threshold: 100,
        }
    }
}

/// Trained topic model: word-topic counts and the derived conditionals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LdaModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations_run: usize,
    /// Model vocabulary, sorted lexicographically.
    words: Vec<String>,
    /// n(word, topic), indexed by position in `words`.
    word_topic: Vec<Vec<u64>>,
    topic_totals: Vec<u64>,
    word_totals: Vec<u64>,
}

impl LdaModel {
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word_index(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }

    pub fn count(&self, word_idx: usize, topic: usize) -> u64 {
        self.word_topic[word_idx][topic]
    }

    /// p(word | topic) = n(w, t) / sum_w' n(w', t).
    pub fn p_word_given_topic(&self, word_idx: usize, topic: usize) -> f64 {
        let total = self.topic_totals[topic];
        if total == 0 {
            return 0.0;
        }
        self.word_topic[word_idx][topic] as f64 / total as f64
    }

    /// p(topic | word) = n(w, t) / sum_t' n(w, t').
    pub fn p_topic_given_word(&self, word_idx: usize, topic: usize) -> f64 {
        let total = self.word_totals[word_idx];
        if total == 0 {
            return 0.0;
        }
        self.word_topic[word_idx][topic] as f64 / total as f64
    }

    pub fn total_count(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    /// Writes the model as a flat text file: a header line with the
    /// parameters, then one `word<TAB>topic<TAB>count` triple per nonzero
    /// cell, sorted by word then topic.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            out,
            "lda\tk={}\talpha={}\tbeta={}\tseed={}\titers={}",
            self.k, self.alpha, self.beta, self.seed, self.iterations_run
        )?;
        for (wi, word) in self.words.iter().enumerate() {
            for (t, &n) in self.word_topic[wi].iter().enumerate() {
                if n > 0 {
                    writeln!(out, "{word}\t{t}\t{n}")?;
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path).map_err(|source| {
            Error::Ingest {
                path: path.to_path_buf(),
                source,
            }
        })?);
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "empty model file".into(),
        })??;
        let mut k = 0usize;
        let mut alpha = 0.0;
        let mut beta = 0.0;
        let mut seed = 0u64;
        let mut iters = 0usize;
        for field in header.split('\t').skip(1) {
            let Some((key, value)) = field.split_once('=') else {
                continue;
            };
            match key {
                "k" => k = value.parse().unwrap_or(0),
                "alpha" => alpha = value.parse().unwrap_or(0.0),
                "beta" => beta = value.parse().unwrap_or(0.0),
                "seed" => seed = value.parse().unwrap_or(0),
                "iters" => iters = value.parse().unwrap_or(0),
                _ => {}
            }
        }
        if !header.starts_with("lda\t") || k == 0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "not an lda model file".into(),
            });
        }
        let mut triples: Vec<(String, usize, u64)> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            let parsed = (parts.len() == 3)
                .then(|| -> Option<(String, usize, u64)> {
                    Some((
                        parts[0].to_string(),
                        parts[1].parse().ok()?,
                        parts[2].parse().ok()?,
                    ))
                })
                .flatten();
            match parsed {
                Some(t) => triples.push(t),
                None => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno + 2,
                        message: "expected word<TAB>topic<TAB>count".into(),
                    })
                }
            }
        }
        let mut words: Vec<String> = triples.iter().map(|(w, _, _)| w.clone()).collect();
        words.sort();
        words.dedup();
        let mut word_topic = vec![vec![0u64; k]; words.len()];
        for (w, t, n) in triples {
            let wi = words.binary_search(&w).unwrap();
            if t >= k {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("topic index {t} out of range for k={k}"),
                });
            }
            word_topic[wi][t] += n;
        }
        let mut model = LdaModel {
            k,
            alpha,
            beta,
            seed,
            iterations_run: iters,
            words,
            word_topic,
            topic_totals: vec![0; k],
            word_totals: Vec::new(),
        };
        model.recompute_totals();
        Ok(model)
    }

    fn recompute_totals(&mut self) {
        self.topic_totals = vec![0; self.k];
        self.word_totals = vec![0; self.words.len()];
        for (wi, row) in self.word_topic.iter().enumerate() {
            for (t, &n) in row.iter().enumerate() {
                self.topic_totals[t] += n;
                self.word_totals[wi] += n;
            }
        }
    }
}

/// Collapsed Gibbs state. [`sweep`](Self::sweep) is exposed separately from
/// [`train_lda`] so invariants can be checked between sweeps.
pub struct GibbsSampler {
    k: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    vocab_words: Vec<String>,
    /// Documents as dense model-vocabulary indices.
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<u16>>,
    doc_topic: Vec<Vec<u32>>,
    word_topic: Vec<Vec<u32>>,
    topic_totals: Vec<u64>,
    rng: StdRng,
    weights_buf: Vec<f64>,
}

impl GibbsSampler {
    pub fn new(docs: &[&CleanDocument], vocab: &Vocab, params: &LdaParams) -> Result<Self> {
        if params.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let mut freq: HashMap<u32, u64> = HashMap::new();
        for doc in docs {
            for &t in &doc.tokens {
                *freq.entry(t).or_insert(0) += 1;
            }
        }
        let mut vocab_words: Vec<String> = freq
            .iter()
            .filter(|(_, &n)| n >= params.threshold)
            .map(|(&id, _)| vocab.word(id).to_string())
            .collect();
        vocab_words.sort();
        if vocab_words.is_empty() {
            return Err(Error::Domain(
                "empty training stream: no word meets the vocabulary threshold".into(),
            ));
        }
        let index: HashMap<&str, u32> = vocab_words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i as u32))
            .collect();

        let rng = StdRng::seed_from_u64(params.seed);
        let mut dense_docs = Vec::new();
        for doc in docs {
            let mapped: Vec<u32> = doc
                .tokens
                .iter()
                .filter_map(|&t| index.get(vocab.word(t)).copied())
                .collect();
            if !mapped.is_empty() {
                dense_docs.push(mapped);
            }
        }
        if dense_docs.is_empty() {
            return Err(Error::Domain("empty training stream".into()));
        }

        let v = vocab_words.len();
        let mut sampler = GibbsSampler {
            k: params.k,
            alpha: params.alpha,
            beta: params.beta,
            seed: params.seed,
            vocab_words,
            assignments: Vec::with_capacity(dense_docs.len()),
            doc_topic: vec![vec![0; params.k]; dense_docs.len()],
            word_topic: vec![vec![0; params.k]; v],
            topic_totals: vec![0; params.k],
            weights_buf: vec![0.0; params.k],
            docs: dense_docs,
            rng,
        };
        for di in 0..sampler.docs.len() {
            let mut z = Vec::with_capacity(sampler.docs[di].len());
            for ti in 0..sampler.docs[di].len() {
                let w = sampler.docs[di][ti] as usize;
                let topic = sampler.rng.random_range(0..sampler.k) as u16;
                z.push(topic);
                sampler.doc_topic[di][topic as usize] += 1;
                sampler.word_topic[w][topic as usize] += 1;
                sampler.topic_totals[topic as usize] += 1;
            }
            sampler.assignments.push(z);
        }
        Ok(sampler)
    }

    /// One full pass over every token; returns the fraction reassigned.
    pub fn sweep(&mut self) -> f64 {
        let v_beta = self.vocab_words.len() as f64 * self.beta;
        let mut changed = 0u64;
        let mut total = 0u64;
        for di in 0..self.docs.len() {
            for ti in 0..self.docs[di].len() {
                total += 1;
                let w = self.docs[di][ti] as usize;
                let old = self.assignments[di][ti] as usize;
                self.doc_topic[di][old] -= 1;
                self.word_topic[w][old] -= 1;
                self.topic_totals[old] -= 1;

                let mut acc = 0.0;
                for t in 0..self.k {
                    let p = (self.doc_topic[di][t] as f64 + self.alpha)
                        * (self.word_topic[w][t] as f64 + self.beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    acc += p;
                    self.weights_buf[t] = acc;
                }
                let u: f64 = self.rng.random::<f64>() * acc;
                let new = self
                    .weights_buf
                    .partition_point(|&c| c <= u)
                    .min(self.k - 1);

                self.assignments[di][ti] = new as u16;
                self.doc_topic[di][new] += 1;
                self.word_topic[w][new] += 1;
                self.topic_totals[new] += 1;
                if new != old {
                    changed += 1;
                }
            }
        }
        changed as f64 / total as f64
    }

    pub fn total_assigned(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    pub fn token_count(&self) -> u64 {
        self.docs.iter().map(|d| d.len() as u64).sum()
    }

    /// Per-token topic assignments, aligned with the retained tokens of the
    /// documents passed to [`new`](Self::new) (sub-threshold tokens are
    /// dropped).
    pub fn assignments(&self) -> &[Vec<u16>] {
        &self.assignments
    }

    pub fn vocab_words(&self) -> &[String] {
        &self.vocab_words
    }

    pub fn into_model(self, iterations_run: usize) -> LdaModel {
        let mut model = LdaModel {
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            iterations_run,
            words: self.vocab_words,
            word_topic: self
                .word_topic
                .into_iter()
                .map(|row| row.into_iter().map(u64::from).collect())
                .collect(),
            topic_totals: Vec::new(),
            word_totals: Vec::new(),
        };
        model.recompute_totals();
        model
    }
}

/// Trains a model: runs sweeps until `max_iters` or until fewer than
/// `convergence` of the tokens are reassigned in a sweep.
pub fn train_lda(docs: &[&CleanDocument], vocab: &Vocab, params: &LdaParams) -> Result<LdaModel> {
    let mut sampler = GibbsSampler::new(docs, vocab, params)?;
    let mut iterations = 0;
    for _ in 0..params.max_iters {
        let moved = sampler.sweep();
        iterations += 1;
        if moved < params.convergence {
            break;
        }
    }
    Ok(sampler.into_model(iterations))
}

/// Topic-weighted mean of the log frequency changes of all words other than
/// the target:
///
/// logTopicChange(t) = sum_{w' != w} p(w'|t) logChange(w') p(t|w') / (1 - p(w|t))
/// advection(w) = sum_t logTopicChange(t) p(t|w)
///
/// `changes` is aligned with [`LdaModel::words`]. A topic fully owned by the
/// target (1 - p(w|t) = 0) is skipped with a warning rather than aborting.
pub fn lda_advection(model: &LdaModel, changes: &[f64], target: &str) -> Result<f64> {
    if changes.len() != model.words().len() {
        return Err(Error::Domain(format!(
            "change vector length {} does not match model vocabulary {}",
            changes.len(),
            model.words().len()
        )));
    }
    let wi = model
        .word_index(target)
        .ok_or_else(|| Error::UnknownWord(target.to_string()))?;
    let mut advection = 0.0;
    for t in 0..model.k {
        let p_t_given_target = model.p_topic_given_word(wi, t);
        if p_t_given_target == 0.0 {
            continue;
        }
        let denom = 1.0 - model.p_word_given_topic(wi, t);
        if denom <= 0.0 {
            eprintln!(
                "warning: topic {t} is fully owned by `{target}`; skipping its contribution"
            );
            continue;
        }
        let mut topic_change = 0.0;
        for (oi, &change) in changes.iter().enumerate() {
            if oi == wi || change == 0.0 {
                continue;
            }
            let p_w = model.p_word_given_topic(oi, t);
            if p_w == 0.0 {
                continue;
            }
            topic_change += p_w * change * model.p_topic_given_word(oi, t);
        }
        advection += topic_change / denom * p_t_given_target;
    }
    Ok(advection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_mixture, DocLength, MixtureSpec, TopicSpec};

    const TOL: f64 = 1e-9;

    fn tiny_params(k: usize, seed: u64) -> LdaParams {
        LdaParams {
            k,
            alpha: 0.1,
            beta: 0.1,
            max_iters: 150,
            seed,
            convergence: 0.001,
            threshold: 1,
        }
    }

    fn mixed_corpus(seed: u64) -> (crate::corpus::PeriodCorpus, crate::synth::GroundTruth) {
        let words = |prefix: &str| -> Vec<(String, f64)> {
            (0..15).map(|i| (format!("{prefix}{i:02}"), 1.0)).collect()
        };
        // Two blocks per document: documents vary in their topic share,
        // which is what makes the latent structure recoverable.
        generate_mixture(&MixtureSpec {
            periods: vec!["p".into()],
            topics: vec![
                TopicSpec {
                    name: "a".into(),
                    words: words("aaa"),
                },
                TopicSpec {
                    name: "b".into(),
                    words: words("bbb"),
                },
            ],
            weights: vec![vec![0.5, 0.5]],
            docs_per_period: 80,
            doc_len: DocLength::Fixed(100),
            block_len: 50,
            seed,
            label_genres: false,
        })
        .unwrap()
    }

    #[test]
    fn single_topic_degeneracy() {
        let (corpus, _) = mixed_corpus(3);
        let docs = corpus.concat_window(0, 1);
        let model = train_lda(&docs, corpus.vocab(), &tiny_params(1, 11)).unwrap();
        let total = model.total_count() as f64;
        for wi in 0..model.words().len() {
            assert!((model.p_topic_given_word(wi, 0) - 1.0).abs() < TOL);
            let unigram = model.word_totals[wi] as f64 / total;
            assert!((model.p_word_given_topic(wi, 0) - unigram).abs() < TOL);
        }
    }

    #[test]
    fn seeded_training_is_deterministic() {
        let (corpus, _) = mixed_corpus(5);
        let docs = corpus.concat_window(0, 1);
        let params = tiny_params(3, 42);
        let a = train_lda(&docs, corpus.vocab(), &params).unwrap();
        let b = train_lda(&docs, corpus.vocab(), &params).unwrap();
        assert_eq!(a.word_topic, b.word_topic);
        assert_eq!(a.iterations_run, b.iterations_run);
    }

    #[test]
    fn two_topics_separate_cleanly() {
        let (corpus, truth) = mixed_corpus(7);
        let docs = corpus.concat_window(0, 1);
        let mut sampler = GibbsSampler::new(&docs, corpus.vocab(), &tiny_params(2, 13)).unwrap();
        for _ in 0..100 {
            if sampler.sweep() < 0.001 {
                break;
            }
        }
        // Majority label inside each latent topic, over all tokens.
        let mut counts = [[0u64; 2]; 2];
        for (di, z_doc) in sampler.assignments().iter().enumerate() {
            for (ti, &z) in z_doc.iter().enumerate() {
                let label = truth.labels[0][di][ti] as usize;
                counts[z as usize][label] += 1;
            }
        }
        let total: u64 = counts.iter().flatten().sum();
        let pure: u64 = counts.iter().map(|row| *row.iter().max().unwrap()).sum();
        let purity = pure as f64 / total as f64;
        assert!(purity >= 0.9, "topic purity {purity} below 0.9");
    }

    #[test]
    fn sweep_conserves_counts_and_normalization() {
        let (corpus, _) = mixed_corpus(9);
        let docs = corpus.concat_window(0, 1);
        let mut sampler = GibbsSampler::new(&docs, corpus.vocab(), &tiny_params(4, 17)).unwrap();
        let tokens = sampler.token_count();
        for _ in 0..5 {
            sampler.sweep();
            assert_eq!(sampler.total_assigned(), tokens);
        }
        let model = sampler.into_model(5);
        for t in 0..model.k {
            let sum: f64 = (0..model.words().len())
                .map(|wi| model.p_word_given_topic(wi, t))
                .sum();
            assert!((sum - 1.0).abs() < TOL, "p(w|t) sums to {sum}");
        }
        for wi in 0..model.words().len() {
            let sum: f64 = (0..model.k)
                .map(|t| model.p_topic_given_word(wi, t))
                .sum();
            assert!((sum - 1.0).abs() < TOL, "p(t|w) sums to {sum}");
        }
    }

    #[test]
    fn empty_stream_is_domain_error() {
        let corpus = crate::corpus::PeriodCorpus::empty(vec!["p".into()]).unwrap();
        let docs = corpus.concat_window(0, 1);
        assert!(matches!(
            GibbsSampler::new(&docs, corpus.vocab(), &tiny_params(2, 1)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn model_roundtrips_through_flat_file() {
        let (corpus, _) = mixed_corpus(21);
        let docs = corpus.concat_window(0, 1);
        let model = train_lda(&docs, corpus.vocab(), &tiny_params(2, 23)).unwrap();
        let dir = std::env::temp_dir().join("advection-lda-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.tsv");
        model.save(&path).unwrap();
        let loaded = LdaModel::load(&path).unwrap();
        assert_eq!(model.k, loaded.k);
        assert_eq!(model.words, loaded.words);
        assert_eq!(model.word_topic, loaded.word_topic);
        assert_eq!(model.iterations_run, loaded.iterations_run);
        std::fs::remove_file(path).unwrap();
    }

    /// Hand evaluation of the advection formula for k = 1, equal unigram
    /// counts over {a, b, x}, logChange(a) = 1, logChange(b) = 0:
    /// (1/3 * 1 * 1) / (1 - 1/3) = 0.5.
    #[test]
    fn lda_advection_hand_example() {
        let model = LdaModel {
            k: 1,
            alpha: 0.1,
            beta: 0.1,
            seed: 0,
            iterations_run: 0,
            words: vec!["a".into(), "b".into(), "x".into()],
            word_topic: vec![vec![10], vec![10], vec![10]],
            topic_totals: vec![30],
            word_totals: vec![10, 10, 10],
        };
        let advection = lda_advection(&model, &[1.0, 0.0, 0.0], "x").unwrap();
        assert!((advection - 0.5).abs() < TOL);

        let zero = lda_advection(&model, &[0.0, 0.0, 0.0], "x").unwrap();
        assert_eq!(zero, 0.0);

        // Scaling every change scales the advection.
        let doubled = lda_advection(&model, &[2.0, 0.0, 0.0], "x").unwrap();
        assert!((doubled - 2.0 * advection).abs() < TOL);

        assert!(lda_advection(&model, &[0.0; 3], "missing").is_err());
        assert!(lda_advection(&model, &[0.0; 2], "x").is_err());
    }

    /// Target concentrated on a topic whose other members all rise by ln 2:
    /// the advection equals ln 2 exactly when the members belong purely to
    /// that topic (the 1 - p(target|topic) denominator renormalizes away
    /// the target's own share).
    #[test]
    fn lda_advection_concentrated_topic() {
        let model = LdaModel {
            k: 2,
            alpha: 0.1,
            beta: 0.1,
            seed: 0,
            iterations_run: 0,
            words: vec!["m1".into(), "m2".into(), "other".into(), "x".into()],
            word_topic: vec![vec![30, 0], vec![10, 0], vec![0, 25], vec![20, 0]],
            topic_totals: vec![60, 25],
            word_totals: vec![30, 10, 25, 20],
        };
        let ln2 = 2f64.ln();
        // Brute-force the printed formula over the vocabulary:
        // topic 0: [p(m1|0)*ln2*1 + p(m2|0)*ln2*1] / (1 - p(x|0))
        //        = (30/60 + 10/60) ln2 / (1 - 20/60) = ln2
        let advection = lda_advection(&model, &[ln2, ln2, 0.0, 0.0], "x").unwrap();
        assert!((advection - ln2).abs() < TOL);
    }
}
