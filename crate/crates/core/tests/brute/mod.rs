//! Brute-force reimplementation of the advection pipeline, kept deliberately
//! independent of the library internals: plain string maps, direct window
//! enumeration, PPMI from explicit probability tables, and a hand-rolled
//! weighted mean. Used only to cross-check pipeline output on tiny corpora.

use std::collections::HashMap;

use advection_core::PeriodCorpus;

pub struct StringCorpus {
    pub periods: Vec<String>,
    /// [period][document][token]
    pub docs: Vec<Vec<Vec<String>>>,
}

pub fn extract(corpus: &PeriodCorpus) -> StringCorpus {
    let periods = corpus.periods().to_vec();
    let docs = (0..periods.len())
        .map(|pi| {
            corpus
                .documents(pi)
                .iter()
                .map(|d| {
                    d.tokens
                        .iter()
                        .map(|&t| corpus.vocab().word(t).to_string())
                        .collect()
                })
                .collect()
        })
        .collect();
    StringCorpus { periods, docs }
}

pub struct BruteRecord {
    pub word: String,
    pub period: String,
    pub log_change: f64,
    pub advection: f64,
}

fn counts_of(docs: &[Vec<String>]) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for doc in docs {
        for tok in doc {
            *counts.entry(tok.clone()).or_insert(0) += 1;
        }
    }
    counts
}

fn log_change_brute(
    count_prev: u64,
    count_curr: u64,
    total_prev: u64,
    total_curr: u64,
) -> f64 {
    let pmw_prev = count_prev as f64 * 1e6 / total_prev as f64;
    let pmw_curr = count_curr as f64 * 1e6 / total_curr as f64;
    if pmw_prev == 0.0 && pmw_curr == 0.0 {
        return 0.0;
    }
    let prev = if pmw_prev > 0.0 {
        pmw_prev
    } else {
        1e6 / total_prev as f64
    };
    let curr = if pmw_curr > 0.0 {
        pmw_curr
    } else {
        1e6 / total_curr as f64
    };
    curr.ln() - prev.ln()
}

pub fn advection_records(
    corpus: &StringCorpus,
    window: usize,
    threshold: u64,
    m: usize,
    smoothing: bool,
) -> Vec<BruteRecord> {
    let per_period_counts: Vec<HashMap<String, u64>> =
        corpus.docs.iter().map(|d| counts_of(d)).collect();
    let totals: Vec<u64> = per_period_counts
        .iter()
        .map(|c| c.values().sum())
        .collect();

    let mut out = Vec::new();
    for t in 1..corpus.periods.len() {
        let mut stream: Vec<&Vec<String>> = Vec::new();
        if smoothing {
            stream.extend(corpus.docs[t - 1].iter());
        }
        stream.extend(corpus.docs[t].iter());

        let mut stream_counts: HashMap<String, u64> = HashMap::new();
        for doc in &stream {
            for tok in doc.iter() {
                *stream_counts.entry(tok.clone()).or_insert(0) += 1;
            }
        }
        let eligible: Vec<String> = {
            let mut v: Vec<String> = stream_counts
                .iter()
                .filter(|(_, &n)| n >= threshold)
                .map(|(w, _)| w.clone())
                .collect();
            v.sort();
            v
        };
        let is_eligible =
            |w: &str| -> bool { stream_counts.get(w).is_some_and(|&n| n >= threshold) };

        // Direct enumeration of every in-document pair within the window.
        let mut cooc: HashMap<(String, String), f64> = HashMap::new();
        for doc in &stream {
            for i in 0..doc.len() {
                for j in (i + 1)..doc.len() {
                    let d = j - i;
                    if d > window {
                        break;
                    }
                    let (a, b) = (&doc[i], &doc[j]);
                    if !is_eligible(a) || !is_eligible(b) {
                        continue;
                    }
                    let w = (window - d + 1) as f64 / window as f64;
                    *cooc.entry((a.clone(), b.clone())).or_insert(0.0) += w;
                    *cooc.entry((b.clone(), a.clone())).or_insert(0.0) += w;
                }
            }
        }
        let grand: f64 = cooc.values().sum();
        let mut row_sums: HashMap<&str, f64> = HashMap::new();
        let mut col_sums: HashMap<&str, f64> = HashMap::new();
        for ((a, b), w) in &cooc {
            *row_sums.entry(a.as_str()).or_insert(0.0) += w;
            *col_sums.entry(b.as_str()).or_insert(0.0) += w;
        }
        let ppmi = |a: &str, b: &str| -> f64 {
            let cell = cooc.get(&(a.to_string(), b.to_string())).copied();
            let Some(cell) = cell else { return 0.0 };
            let p_ab = cell / grand;
            let p_a = row_sums[a] / grand;
            let p_b = col_sums[b] / grand;
            (p_ab / (p_a * p_b)).log2().max(0.0)
        };

        for target in &eligible {
            if !smoothing {
                let prev_n = per_period_counts[t - 1].get(target).copied().unwrap_or(0);
                let curr_n = per_period_counts[t].get(target).copied().unwrap_or(0);
                if prev_n < threshold || curr_n < threshold {
                    continue;
                }
            }
            if !row_sums.contains_key(target.as_str()) {
                continue;
            }
            let mut contexts: Vec<(&String, f64)> = eligible
                .iter()
                .filter(|c| *c != target)
                .map(|c| (c, ppmi(target, c)))
                .filter(|(_, w)| *w > 0.0)
                .collect();
            contexts.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(y.0)));
            contexts.truncate(m);
            if contexts.is_empty() {
                continue;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for (c, w) in &contexts {
                let change = log_change_brute(
                    per_period_counts[t - 1].get(*c).copied().unwrap_or(0),
                    per_period_counts[t].get(*c).copied().unwrap_or(0),
                    totals[t - 1],
                    totals[t],
                );
                num += change * w;
                den += w;
            }
            out.push(BruteRecord {
                word: target.clone(),
                period: corpus.periods[t].clone(),
                log_change: log_change_brute(
                    per_period_counts[t - 1].get(target).copied().unwrap_or(0),
                    per_period_counts[t].get(target).copied().unwrap_or(0),
                    totals[t - 1],
                    totals[t],
                ),
                advection: num / den,
            });
        }
    }
    out
}
